#ifndef COVINFER_INTERACTION_HPP
#define COVINFER_INTERACTION_HPP

#include <array>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "covinfer/config_space.hpp"

namespace covinfer {

enum class InteractionKind { True, Conj, Disj, ConjDisj, DisjConj };

/// An interaction template over a configuration space:
///   True                    -- satisfied by everything
///   Conj(core)              -- every constrained option's value is in its set
///   Disj(clauses)           -- some constrained option's value is in its set;
///                              with no clauses this is the unsatisfiable formula
///   ConjDisj(core, clauses) -- Conj(core) AND Disj(clauses)
///   DisjConj(clauses, core) -- Disj(clauses) OR Conj(core)
/// Instances are normalized at construction (see the factories), so structural
/// equality doubles as the fix-point equality.
class Interaction {
 public:
  Interaction() = default;  // True

  static Interaction boolean_true() { return Interaction(); }
  /// Unsatisfiable disjunction; arises when the non-covering configurations
  /// union to the full domain on every option.
  static Interaction contradiction() {
    return Interaction(InteractionKind::Disj, SettingSet(), SettingSet());
  }
  /// Empty cores collapse to True.
  static Interaction make_conj(SettingSet core);
  /// Note: empty clause sets yield the contradiction, not True.
  static Interaction make_disj(SettingSet clauses);
  /// Normalizes against the core: each shared option's clause set is cut down
  /// to its intersection with the core set (equivalent under the core). A
  /// clause that cannot fire is dropped; a clause implied by the core
  /// collapses the whole disjunct; if no clause can ever fire the location is
  /// unreachable under core AND clauses and the result is True (eliminated).
  static Interaction make_conjdisj(const ConfigSpace& space, SettingSet core, SettingSet clauses);
  /// Dual normalization: a core constraint whose set together with the
  /// option's clause set covers the full domain is redundant (any value either
  /// fires the clause or passes the core) and is dropped.
  static Interaction make_disjconj(const ConfigSpace& space, SettingSet clauses, SettingSet core);

  InteractionKind kind() const { return kind_; }
  const SettingSet& core() const { return core_; }
  const SettingSet& clauses() const { return clauses_; }

  bool is_true() const { return kind_ == InteractionKind::True; }
  bool is_contradiction() const { return kind_ == InteractionKind::Disj && clauses_.empty(); }

  /// Number of distinct options mentioned.
  std::size_t length() const;
  std::set<OptionIndex> mentioned_options() const;

  bool operator==(const Interaction& other) const;
  bool operator<(const Interaction& other) const;

 private:
  Interaction(InteractionKind kind, SettingSet core, SettingSet clauses)
      : kind_(kind), core_(std::move(core)), clauses_(std::move(clauses)) {}

  InteractionKind kind_ = InteractionKind::True;
  SettingSet core_;
  SettingSet clauses_;
};

/// Template semantics evaluated against a total assignment.
bool satisfies(const Configuration& config, const Interaction& phi);

/// Complement of a conjunctive core: Disj(negate_core(S)) is equivalent to
/// NOT Conj(S). An involution.
SettingSet negate_core(const SettingSet& core, const ConfigSpace& space);

enum class Implication { Yes, No, Unknown };

/// Finite-domain implication check by enumerating assignments of the options
/// mentioned by either formula (all others are irrelevant to both). Returns
/// Unknown only when that assignment product exceeds `cap`.
Implication implies(const Interaction& phi, const Interaction& psi, const ConfigSpace& space,
                    std::uint64_t cap = kDefaultImplicationCap);

/// The per-location candidate interactions of one inference pass, plus the
/// auxiliary cores retained for refinement selection.
struct CandidateTuple {
  Interaction conj;
  Interaction disj;
  Interaction conjdisj;
  Interaction disjconj;
  SettingSet conj_prime;
  SettingSet disj_prime;

  /// Structural equality of the four candidate components (the fix-point test).
  bool same_candidates(const CandidateTuple& other) const {
    return conj == other.conj && disj == other.disj && conjdisj == other.conjdisj &&
           disjconj == other.disjconj;
  }
};

/// One inference pass for a location:
///   conj     = union of covering configurations
///   disj     = negated union of non-covering configurations (True if none)
///   conjdisj = conj AND the negated union of non-covering configurations
///              that satisfy conj (degrades to conj when there are none)
///   disjconj = disj OR the union of covering configurations that falsify
///              disj (degrades to disj when there are none)
/// `covering` must be nonempty and disjoint from `non_covering`.
CandidateTuple infer_candidates(const ConfigSpace& space,
                                std::span<const Configuration> covering,
                                std::span<const Configuration> non_covering);

/// Spelled-out form of make_conjdisj for callers holding raw cores.
Interaction normalize_conjdisj(const ConfigSpace& space, SettingSet core, SettingSet clauses);

/// Returns phi unchanged if every covering configuration satisfies it,
/// otherwise True (the candidate was a heuristic miss and is eliminated).
Interaction check(const Interaction& phi, std::span<const Configuration> covering);

/// Final interaction for a location: a conjunction of pairwise-incomparable
/// template survivors. Usually a single part.
struct FinalResult {
  std::vector<Interaction> parts;  // canonical order, nonempty

  bool is_true() const { return parts.size() == 1 && parts.front().is_true(); }
  std::size_t length() const;
  std::set<OptionIndex> mentioned_options() const;

  bool operator==(const FinalResult& other) const { return parts == other.parts; }
};

bool satisfies(const Configuration& config, const FinalResult& result);

FinalResult make_final_result(std::vector<Interaction> parts);

/// Keeps the strongest of the four checked components: structural duplicates
/// and strictly weaker components are discarded (Unknown implications count
/// as incomparable); mutually implying survivors keep their first
/// representative in conj, disj, conjdisj, disjconj order.
FinalResult sel_strongest(const ConfigSpace& space, const CandidateTuple& tuple,
                          std::uint64_t cap = kDefaultImplicationCap);

Implication implies(const FinalResult& phi, const FinalResult& psi, const ConfigSpace& space,
                    std::uint64_t cap = kDefaultImplicationCap);

enum class RenderStyle { Unicode, Ascii };

/// Deterministic textual form: options in space order; `x` / `¬x` for boolean
/// singletons, `z∈{0,3}` otherwise; conjunct atoms joined by `∧` with the
/// disjunct parenthesized. Ascii style uses `!x`, `z in {0,3}`, `&&`, `||`.
std::string render(const ConfigSpace& space, const Interaction& phi,
                   RenderStyle style = RenderStyle::Unicode);
/// Multi-part results render each part parenthesized, joined conjunctively.
std::string render(const ConfigSpace& space, const FinalResult& result,
                   RenderStyle style = RenderStyle::Unicode);

}  // namespace covinfer

#endif
