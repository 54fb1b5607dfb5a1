#pragma once

#include "pmp/library.hpp"

namespace pmp {

// Each operator reads `over`; rules outside it are expected to be passed by
// a lift. Each declaration is the input's with the principal formula replaced.

// Root {eta}, eta a false closed literal; Ax on eta becomes True of ~eta.
LocalFunction inverse_false_literal(const Formula& eta, const TheoryId& over);
// Root {l and r}; at IAnd continue at premise L (right=false) or R.
LocalFunction inverse_conj(const Formula& l, const Formula& r, bool right, const TheoryId& over);
// Root {all}; at the omega rule continue at premise n.
LocalFunction inverse_forall(const Formula& all, std::uint32_t n, const TheoryId& over);
// Roots {p0 or p1}, {~p0 and ~p1}.
LocalFunction elim_disj(const Formula& p0, const Formula& p1, const TheoryId& over);
// Roots {ex}, {~ex}.
LocalFunction elim_exists(const Formula& ex, const TheoryId& over);
// Roots {X t}, {~X t}.
LocalFunction elim_set_literal(const SetVar& x, const Term& t, const TheoryId& over);
// Roots {all2}, {~all2}.
LocalFunction elim_second_order(const Formula& all2, const TheoryId& over);

// Root {} reading NoRead(N, L, r+1); removes Cuts of rank r.
LocalFunction reduce(std::uint32_t r, std::uint32_t N, std::uint32_t L);

// The node of reduce(r, N, L)'s tree that reads the input at pos.
NodePtr reduce_read(std::uint32_t r, std::uint32_t N, std::uint32_t L, const Address& pos);

// The function handling a cut on f, its roots matched to the two premises:
// inputs[i] is Top or Bot for roots[i].
struct CutDispatch {
  LocalFunction op;
  std::vector<Label> sides;
};
CutDispatch dispatch_cut(const Formula& f, const TheoryId& over);

// Applies lifted Reduce_{r-1}, ..., Reduce_0. d must be Infinitary(N, L, r').
ProofTree eliminate_all_cuts(const ProofTree& d, std::optional<std::uint32_t> r = std::nullopt);

}  // namespace pmp
