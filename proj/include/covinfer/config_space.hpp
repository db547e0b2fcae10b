#ifndef COVINFER_CONFIG_SPACE_HPP
#define COVINFER_CONFIG_SPACE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covinfer/rng.hpp"

namespace covinfer {

/// Malformed input: space/subject/runner documents, formulas, configurations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coverage oracle could not answer for a configuration.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using OptionIndex = std::size_t;
using ValueIndex = std::uint16_t;

/// Default guardrail for exhaustive enumeration of a configuration space.
inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000;
/// Default cap on the mentioned-option assignment product in implication checks.
inline constexpr std::uint64_t kDefaultImplicationCap = 1'000'000;

/// One named option and its finite, ordered set of admissible value tokens.
/// Values are opaque strings compared by equality; the algorithms never need
/// arithmetic on them.
struct OptionDomain {
  std::string name;
  std::vector<std::string> values;  // >= 2, all distinct
};

class ConfigSpace;

/// A total assignment of one value per option of a space, stored as value
/// indices in the space's option order. Immutable after construction.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<ValueIndex> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  ValueIndex value_at(OptionIndex option) const { return values_.at(option); }
  const std::vector<ValueIndex>& values() const { return values_; }

  bool operator==(const Configuration& other) const { return values_ == other.values_; }
  bool operator<(const Configuration& other) const { return values_ < other.values_; }

 private:
  std::vector<ValueIndex> values_;
};

/// Ordered finite option domains plus an optional default configuration.
/// Immutable after construction and safe to share across threads.
class ConfigSpace {
 public:
  ConfigSpace() = default;
  explicit ConfigSpace(std::vector<OptionDomain> options);

  const std::vector<OptionDomain>& options() const { return options_; }
  std::size_t option_count() const { return options_.size(); }
  const OptionDomain& option(OptionIndex i) const { return options_.at(i); }

  /// Index of a named option, or -1 if absent.
  int option_index(std::string_view name) const;
  /// Index of a value token within an option's domain, or -1 if absent.
  int value_index(OptionIndex option, std::string_view value) const;

  /// True when the domain is exactly the tokens {"0","1"}; such options
  /// render as bare `x` / `¬x` instead of membership sets.
  bool is_boolean(OptionIndex option) const;

  /// Exact number of configurations, as a decimal string (may exceed 64 bits).
  std::string space_size_decimal() const;
  /// True iff the space size fits under `cap`; writes the exact size when it fits.
  bool space_size_at_most(std::uint64_t cap, std::uint64_t* size_out = nullptr) const;

  const std::optional<Configuration>& default_config() const { return default_; }
  void set_default_config(const std::map<std::string, std::string>& assignment);

  bool operator==(const ConfigSpace& other) const;

 private:
  std::vector<OptionDomain> options_;
  std::map<std::string, OptionIndex, std::less<>> index_;
  std::optional<Configuration> default_;
};

/// Builds a validated Configuration from a full name -> value assignment.
Configuration make_configuration(const ConfigSpace& space,
                                 const std::map<std::string, std::string>& assignment);

/// Canonical serialization: options in space order, `name=value` joined by `,`.
/// Used as cache key and for deterministic dedup.
std::string canonical_config_string(const ConfigSpace& space, const Configuration& config);
Configuration parse_canonical_config(const ConfigSpace& space, std::string_view text);

/// A per-option map to nonempty proper value subsets. An option whose set
/// would equal its full domain is simply not stored (the "any value"
/// convention), so the empty SettingSet denotes the formula `true` when read
/// as a conjunction.
class SettingSet {
 public:
  SettingSet() = default;

  bool empty() const { return constraints_.empty(); }
  /// Number of constrained options.
  std::size_t length() const { return constraints_.size(); }
  bool constrains(OptionIndex option) const { return constraints_.count(option) != 0; }
  const std::set<ValueIndex>& values_for(OptionIndex option) const;
  const std::map<OptionIndex, std::set<ValueIndex>>& constraints() const { return constraints_; }

  /// Adds or replaces a constraint. Full-domain sets are dropped; empty sets
  /// and out-of-range values are rejected.
  void constrain(const ConfigSpace& space, OptionIndex option, std::set<ValueIndex> values);
  void remove(OptionIndex option) { constraints_.erase(option); }

  /// Per-option complement. Complements of proper nonempty subsets are proper
  /// and nonempty, so this is an involution.
  SettingSet negated(const ConfigSpace& space) const;

  /// Conjunctive reading: every constrained option's value is in its set.
  /// The empty SettingSet is satisfied by everything.
  bool contains(const Configuration& config) const;
  /// Disjunctive reading: at least one constrained option's value is in its
  /// set. The empty SettingSet is satisfied by nothing.
  bool touches(const Configuration& config) const;

  bool operator==(const SettingSet& other) const { return constraints_ == other.constraints_; }
  bool operator<(const SettingSet& other) const { return constraints_ < other.constraints_; }

 private:
  std::map<OptionIndex, std::set<ValueIndex>> constraints_;
};

/// Per-option union of the values the given configurations assign; options
/// reaching their full domain are dropped. The input must be nonempty.
SettingSet pointwise_union(const ConfigSpace& space, std::span<const Configuration> configs);

/// Minimal 1-way covering array: as many rows as the largest domain, built
/// column-wise by shuffling each option's values and cycling them down the
/// rows. Every (option, value) pair occurs at least once.
std::vector<Configuration> one_way_covering_array(const ConfigSpace& space, Rng& rng);

/// Lexicographic enumeration over option order and value order. Refuses to
/// enumerate spaces larger than `cap`.
std::vector<Configuration> all_configurations(const ConfigSpace& space,
                                              std::uint64_t cap = kDefaultEnumerationCap);

/// Fills a partial assignment: constrained options draw uniformly from their
/// constraint set, the rest uniformly from their full domain, in space order.
Configuration complete_randomly(const SettingSet& partial, const ConfigSpace& space, Rng& rng);

/// Invokes `fn(config)` for every assignment of the listed options, all other
/// options pinned to their first value. `fn` returns false to stop early.
/// Returns false if stopped early.
template <typename F>
bool for_each_assignment(const ConfigSpace& space, const std::vector<OptionIndex>& options, F&& fn) {
  std::vector<ValueIndex> values(space.option_count(), 0);
  if (options.empty()) {
    return fn(Configuration(values));
  }
  std::vector<std::size_t> counters(options.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < options.size(); ++i) {
      values[options[i]] = static_cast<ValueIndex>(counters[i]);
    }
    if (!fn(Configuration(values))) return false;
    std::size_t pos = options.size();
    while (pos > 0) {
      --pos;
      if (++counters[pos] < space.option(options[pos]).values.size()) break;
      counters[pos] = 0;
      if (pos == 0) return true;
    }
  }
}

}  // namespace covinfer

#endif
