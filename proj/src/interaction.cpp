#include "covinfer/interaction.hpp"

#include <algorithm>
#include <tuple>

namespace covinfer {

Interaction Interaction::make_conj(SettingSet core) {
  if (core.empty()) return boolean_true();
  return Interaction(InteractionKind::Conj, std::move(core), SettingSet());
}

Interaction Interaction::make_disj(SettingSet clauses) {
  return Interaction(InteractionKind::Disj, SettingSet(), std::move(clauses));
}

Interaction Interaction::make_conjdisj(const ConfigSpace& space, SettingSet core,
                                       SettingSet clauses) {
  if (core.empty()) return make_disj(std::move(clauses));
  if (clauses.empty()) return boolean_true();  // conj AND false: unreachable, eliminated
  SettingSet normalized;
  for (const auto& [option, clause_values] : clauses.constraints()) {
    if (!core.constrains(option)) {
      normalized.constrain(space, option, clause_values);
      continue;
    }
    const std::set<ValueIndex>& core_values = core.values_for(option);
    std::set<ValueIndex> intersection;
    std::set_intersection(clause_values.begin(), clause_values.end(), core_values.begin(),
                          core_values.end(),
                          std::inserter(intersection, intersection.begin()));
    if (intersection.empty()) continue;  // clause cannot fire under the core
    if (intersection == core_values) return make_conj(std::move(core));  // disjunct implied
    normalized.constrain(space, option, std::move(intersection));
  }
  if (normalized.empty()) return boolean_true();  // no clause can ever fire
  return Interaction(InteractionKind::ConjDisj, std::move(core), std::move(normalized));
}

Interaction Interaction::make_disjconj(const ConfigSpace& space, SettingSet clauses,
                                       SettingSet core) {
  if (clauses.empty()) return make_conj(std::move(core));
  if (core.empty()) return boolean_true();  // disj OR true
  SettingSet reduced = core;
  for (const auto& [option, core_values] : core.constraints()) {
    if (!clauses.constrains(option)) continue;
    const std::set<ValueIndex>& clause_values = clauses.values_for(option);
    std::set<ValueIndex> combined = core_values;
    combined.insert(clause_values.begin(), clause_values.end());
    if (combined.size() == space.option(option).values.size()) {
      // Any value outside the core fires the clause; the constraint is redundant.
      reduced.remove(option);
    }
  }
  if (reduced.empty()) return make_disj(std::move(clauses));
  return Interaction(InteractionKind::DisjConj, std::move(reduced), std::move(clauses));
}

std::size_t Interaction::length() const { return mentioned_options().size(); }

std::set<OptionIndex> Interaction::mentioned_options() const {
  std::set<OptionIndex> out;
  for (const auto& [option, values] : core_.constraints()) out.insert(option);
  for (const auto& [option, values] : clauses_.constraints()) out.insert(option);
  return out;
}

bool Interaction::operator==(const Interaction& other) const {
  return kind_ == other.kind_ && core_ == other.core_ && clauses_ == other.clauses_;
}

bool Interaction::operator<(const Interaction& other) const {
  if (kind_ != other.kind_) return kind_ < other.kind_;
  if (core_ == other.core_) return clauses_ < other.clauses_;
  return core_ < other.core_;
}

bool satisfies(const Configuration& config, const Interaction& phi) {
  switch (phi.kind()) {
    case InteractionKind::True:
      return true;
    case InteractionKind::Conj:
      return phi.core().contains(config);
    case InteractionKind::Disj:
      return phi.clauses().touches(config);
    case InteractionKind::ConjDisj:
      return phi.core().contains(config) && phi.clauses().touches(config);
    case InteractionKind::DisjConj:
      return phi.clauses().touches(config) || phi.core().contains(config);
  }
  return false;
}

SettingSet negate_core(const SettingSet& core, const ConfigSpace& space) {
  return core.negated(space);
}

Implication implies(const Interaction& phi, const Interaction& psi, const ConfigSpace& space,
                    std::uint64_t cap) {
  std::set<OptionIndex> mentioned = phi.mentioned_options();
  std::set<OptionIndex> psi_options = psi.mentioned_options();
  mentioned.insert(psi_options.begin(), psi_options.end());
  std::vector<OptionIndex> options(mentioned.begin(), mentioned.end());

  std::uint64_t product = 1;
  for (OptionIndex option : options) {
    const std::uint64_t k = space.option(option).values.size();
    if (product > cap / k) return Implication::Unknown;
    product *= k;
  }
  if (product > cap) return Implication::Unknown;

  bool holds = for_each_assignment(space, options, [&](const Configuration& config) {
    return !satisfies(config, phi) || satisfies(config, psi);
  });
  return holds ? Implication::Yes : Implication::No;
}

CandidateTuple infer_candidates(const ConfigSpace& space,
                                std::span<const Configuration> covering,
                                std::span<const Configuration> non_covering) {
  if (covering.empty()) {
    throw ValidationError("infer_candidates requires at least one covering configuration");
  }
  {
    std::set<Configuration> cov_set(covering.begin(), covering.end());
    for (const Configuration& c : non_covering) {
      if (cov_set.count(c) != 0) {
        throw ValidationError(
            "infer_candidates: covering and non-covering sets overlap");
      }
    }
  }

  CandidateTuple tuple;
  SettingSet conj_core = pointwise_union(space, covering);
  tuple.conj = Interaction::make_conj(conj_core);

  SettingSet noncov_core;  // empty reads as "satisfied by everything"
  if (non_covering.empty()) {
    tuple.disj = Interaction::boolean_true();
  } else {
    noncov_core = pointwise_union(space, non_covering);
    tuple.disj = Interaction::make_disj(noncov_core.negated(space));
  }

  // conjdisj: project onto the non-covering configurations that satisfy conj.
  std::vector<Configuration> sub_ncov;
  for (const Configuration& c : non_covering) {
    if (conj_core.contains(c)) sub_ncov.push_back(c);
  }
  if (sub_ncov.empty()) {
    tuple.conjdisj = tuple.conj;
  } else {
    tuple.disj_prime = pointwise_union(space, sub_ncov);
    tuple.conjdisj =
        Interaction::make_conjdisj(space, conj_core, tuple.disj_prime.negated(space));
  }

  // disjconj: extend disj with the covering configurations it fails to cover,
  // i.e. those satisfying the non-covering core (c implies NOT disj).
  if (non_covering.empty()) {
    tuple.disjconj = Interaction::boolean_true();
  } else {
    std::vector<Configuration> sub_cov;
    for (const Configuration& c : covering) {
      if (noncov_core.contains(c)) sub_cov.push_back(c);
    }
    if (sub_cov.empty()) {
      tuple.disjconj = tuple.disj;
    } else {
      tuple.conj_prime = pointwise_union(space, sub_cov);
      tuple.disjconj =
          Interaction::make_disjconj(space, noncov_core.negated(space), tuple.conj_prime);
    }
  }
  return tuple;
}

Interaction normalize_conjdisj(const ConfigSpace& space, SettingSet core, SettingSet clauses) {
  return Interaction::make_conjdisj(space, std::move(core), std::move(clauses));
}

Interaction check(const Interaction& phi, std::span<const Configuration> covering) {
  for (const Configuration& c : covering) {
    if (!satisfies(c, phi)) return Interaction::boolean_true();
  }
  return phi;
}

std::size_t FinalResult::length() const { return mentioned_options().size(); }

std::set<OptionIndex> FinalResult::mentioned_options() const {
  std::set<OptionIndex> out;
  for (const Interaction& part : parts) {
    std::set<OptionIndex> options = part.mentioned_options();
    out.insert(options.begin(), options.end());
  }
  return out;
}

bool satisfies(const Configuration& config, const FinalResult& result) {
  for (const Interaction& part : result.parts) {
    if (!satisfies(config, part)) return false;
  }
  return true;
}

FinalResult make_final_result(std::vector<Interaction> parts) {
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  if (parts.empty()) parts.push_back(Interaction::boolean_true());
  if (parts.size() > 1) {
    // A True part is redundant next to anything else.
    parts.erase(std::remove_if(parts.begin(), parts.end(),
                               [](const Interaction& p) { return p.is_true(); }),
                parts.end());
  }
  return FinalResult{std::move(parts)};
}

FinalResult sel_strongest(const ConfigSpace& space, const CandidateTuple& tuple,
                          std::uint64_t cap) {
  std::array<const Interaction*, 4> components = {&tuple.conj, &tuple.disj, &tuple.conjdisj,
                                                  &tuple.disjconj};
  std::array<bool, 4> discarded = {false, false, false, false};

  for (std::size_t i = 0; i < components.size(); ++i) {
    if (discarded[i]) continue;
    for (std::size_t j = i + 1; j < components.size(); ++j) {
      if (discarded[j]) continue;
      if (*components[i] == *components[j]) {
        discarded[j] = true;
        continue;
      }
      Implication i_to_j = implies(*components[i], *components[j], space, cap);
      Implication j_to_i = implies(*components[j], *components[i], space, cap);
      if (i_to_j == Implication::Yes && j_to_i == Implication::Yes) {
        discarded[j] = true;  // logically equal: keep the earlier template
      } else if (i_to_j == Implication::Yes) {
        discarded[j] = true;  // j is strictly weaker
      } else if (j_to_i == Implication::Yes) {
        discarded[i] = true;  // i is strictly weaker
        break;
      }
    }
  }

  std::vector<Interaction> survivors;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (!discarded[i]) survivors.push_back(*components[i]);
  }
  return make_final_result(std::move(survivors));
}

Implication implies(const FinalResult& phi, const FinalResult& psi, const ConfigSpace& space,
                    std::uint64_t cap) {
  std::set<OptionIndex> mentioned = phi.mentioned_options();
  std::set<OptionIndex> psi_options = psi.mentioned_options();
  mentioned.insert(psi_options.begin(), psi_options.end());
  std::vector<OptionIndex> options(mentioned.begin(), mentioned.end());

  std::uint64_t product = 1;
  for (OptionIndex option : options) {
    const std::uint64_t k = space.option(option).values.size();
    if (product > cap / k) return Implication::Unknown;
    product *= k;
  }
  if (product > cap) return Implication::Unknown;

  bool holds = for_each_assignment(space, options, [&](const Configuration& config) {
    return !satisfies(config, phi) || satisfies(config, psi);
  });
  return holds ? Implication::Yes : Implication::No;
}

namespace {

struct Symbols {
  const char* conj_op;
  const char* disj_op;
  const char* not_prefix;
  const char* in_op;
};

constexpr Symbols kUnicode = {" ∧ ", " ∨ ", "¬", "∈"};
constexpr Symbols kAscii = {" && ", " || ", "!", " in "};

std::string render_atom(const ConfigSpace& space, OptionIndex option,
                        const std::set<ValueIndex>& values, const Symbols& sym) {
  const OptionDomain& domain = space.option(option);
  if (values.size() == 1 && space.is_boolean(option)) {
    const std::string& token = domain.values.at(*values.begin());
    if (token == "1") return domain.name;
    return std::string(sym.not_prefix) + domain.name;
  }
  std::string out = domain.name;
  out += sym.in_op;
  out += '{';
  bool first = true;
  for (ValueIndex v : values) {
    if (!first) out += ',';
    first = false;
    out += domain.values.at(v);
  }
  out += '}';
  return out;
}

std::string render_joined(const ConfigSpace& space, const SettingSet& settings, const char* op,
                          const Symbols& sym) {
  std::string out;
  bool first = true;
  for (const auto& [option, values] : settings.constraints()) {
    if (!first) out += op;
    first = false;
    out += render_atom(space, option, values, sym);
  }
  return out;
}

}  // namespace

std::string render(const ConfigSpace& space, const Interaction& phi, RenderStyle style) {
  const Symbols& sym = style == RenderStyle::Unicode ? kUnicode : kAscii;
  switch (phi.kind()) {
    case InteractionKind::True:
      return "true";
    case InteractionKind::Conj:
      return render_joined(space, phi.core(), sym.conj_op, sym);
    case InteractionKind::Disj:
      if (phi.clauses().empty()) return "false";
      return render_joined(space, phi.clauses(), sym.disj_op, sym);
    case InteractionKind::ConjDisj:
      return render_joined(space, phi.core(), sym.conj_op, sym) + sym.conj_op + "(" +
             render_joined(space, phi.clauses(), sym.disj_op, sym) + ")";
    case InteractionKind::DisjConj:
      return render_joined(space, phi.clauses(), sym.disj_op, sym) + sym.disj_op + "(" +
             render_joined(space, phi.core(), sym.conj_op, sym) + ")";
  }
  return "true";
}

std::string render(const ConfigSpace& space, const FinalResult& result, RenderStyle style) {
  if (result.parts.size() == 1) return render(space, result.parts.front(), style);
  const Symbols& sym = style == RenderStyle::Unicode ? kUnicode : kAscii;
  std::string out;
  bool first = true;
  for (const Interaction& part : result.parts) {
    if (!first) out += sym.conj_op;
    first = false;
    out += "(" + render(space, part, style) + ")";
  }
  return out;
}

}  // namespace covinfer
