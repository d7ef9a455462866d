#pragma once

#include <icca/icca.hpp>

namespace fx {

using namespace icca;

// b1 alone, then U2 (x5) holding U3 (x10) around b2, plus b3.
inline UrPath scopes_path() {
  return UrPath{{region(1, 1, {block("b1", 1)}),
                 region(2, 5, {region(3, 10, {block("b2", 2)}), block("b3", 3)})}};
}

// A B C A B (A x3). Windows of the four hit references are the classic ones.
constexpr Address A = 10, B = 11, C = 12;
inline UrPath window_path() {
  return UrPath{{region(1, 1, {block("a1", A)}), region(2, 1, {block("b2", B)}), region(3, 1, {block("c3", C)}),
                 region(4, 1, {block("a4", A)}), region(5, 1, {block("b5", B)}),
                 region(6, 3, {block("a6", A)})}};
}

// Five local regions yielding CRs {r1} {r1,r2} {r2,r3} {r2} against three
// remote regions, associativity 5.
inline UrPath dp_local() {
  return UrPath{{region(1, 1, {block("a1", 1), block("e1", 2), block("g1", 3)}), region(2, 1, {block("b2", 4)}),
                 region(3, 1, {block("a3", 1)}), region(4, 2, {block("c4", 5)}), region(5, 1, {block("b5", 4)})}};
}
inline UrPath dp_remote() {
  return UrPath{{region(1, 1, {block("x", 10), block("y", 11)}), region(2, 1, {block("z", 12)}),
                 region(3, 1, {block("w1", 13), block("w2", 14), block("w3", 15), block("w4", 16)})}};
}
constexpr Count kDpAssoc = 5;

// Loop over a, b (age 1 each) against two single-address remote regions.
inline UrPath carry_local() { return UrPath{{region(1, 2, {block("a", 1), block("b", 2)})}}; }
inline UrPath carry_remote() { return UrPath{{region(1, 1, {block("x", 10)}), region(2, 2, {block("y", 11)})}}; }

inline SegmentFn single_core(const std::vector<RemoteRegion>& seq) {
  return [&seq](std::size_t a, std::size_t b) { return segment_interference(seq, a, b); };
}

inline MemoryReference ref(std::size_t idx, Address a, Count delta, Count age, std::size_t home = 1) {
  MemoryReference r;
  r.index = idx;
  r.block = "r" + std::to_string(idx);
  r.address = a;
  r.count = delta;
  r.age = Age(age);
  r.home = home;
  return r;
}

inline TaskCfg task_of(std::string name, UrPath p) {
  TaskCfg t;
  t.name = std::move(name);
  t.paths.push_back(std::move(p));
  return t;
}

}  // namespace fx
