#include "covinfer/config_space.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace covinfer {

ConfigSpace::ConfigSpace(std::vector<OptionDomain> options) : options_(std::move(options)) {
  for (OptionIndex i = 0; i < options_.size(); ++i) {
    const OptionDomain& opt = options_[i];
    if (opt.name.empty()) {
      throw ValidationError("option #" + std::to_string(i) + " has an empty name");
    }
    if (!index_.emplace(opt.name, i).second) {
      throw ValidationError("duplicate option name '" + opt.name + "'");
    }
    if (opt.values.size() < 2) {
      throw ValidationError("option '" + opt.name + "' needs at least 2 values");
    }
    std::set<std::string_view> seen;
    for (const std::string& v : opt.values) {
      if (!seen.insert(v).second) {
        throw ValidationError("option '" + opt.name + "' lists value '" + v + "' twice");
      }
    }
    if (opt.values.size() > static_cast<std::size_t>(std::numeric_limits<ValueIndex>::max())) {
      throw ValidationError("option '" + opt.name + "' has too many values");
    }
  }
}

int ConfigSpace::option_index(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : static_cast<int>(it->second);
}

int ConfigSpace::value_index(OptionIndex option, std::string_view value) const {
  const std::vector<std::string>& values = options_.at(option).values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) return static_cast<int>(i);
  }
  return -1;
}

bool ConfigSpace::is_boolean(OptionIndex option) const {
  const std::vector<std::string>& values = options_.at(option).values;
  return values.size() == 2 && ((values[0] == "0" && values[1] == "1") ||
                                (values[0] == "1" && values[1] == "0"));
}

std::string ConfigSpace::space_size_decimal() const {
  // Little-endian decimal digits, multiplied by each domain cardinality.
  std::vector<std::uint32_t> digits{1};
  for (const OptionDomain& opt : options_) {
    std::uint64_t carry = 0;
    for (std::uint32_t& d : digits) {
      std::uint64_t value = static_cast<std::uint64_t>(d) * opt.values.size() + carry;
      d = static_cast<std::uint32_t>(value % 10);
      carry = value / 10;
    }
    while (carry != 0) {
      digits.push_back(static_cast<std::uint32_t>(carry % 10));
      carry /= 10;
    }
  }
  std::string out(digits.size(), '0');
  for (std::size_t i = 0; i < digits.size(); ++i) {
    out[digits.size() - 1 - i] = static_cast<char>('0' + digits[i]);
  }
  return out;
}

bool ConfigSpace::space_size_at_most(std::uint64_t cap, std::uint64_t* size_out) const {
  std::uint64_t product = 1;
  for (const OptionDomain& opt : options_) {
    const std::uint64_t k = opt.values.size();
    if (product > cap / k) return false;
    product *= k;
  }
  if (product > cap) return false;
  if (size_out != nullptr) *size_out = product;
  return true;
}

void ConfigSpace::set_default_config(const std::map<std::string, std::string>& assignment) {
  default_ = make_configuration(*this, assignment);
}

bool ConfigSpace::operator==(const ConfigSpace& other) const {
  if (options_.size() != other.options_.size()) return false;
  for (std::size_t i = 0; i < options_.size(); ++i) {
    if (options_[i].name != other.options_[i].name) return false;
    if (options_[i].values != other.options_[i].values) return false;
  }
  return true;
}

Configuration make_configuration(const ConfigSpace& space,
                                 const std::map<std::string, std::string>& assignment) {
  for (const auto& [name, value] : assignment) {
    if (space.option_index(name) < 0) {
      throw ValidationError("configuration assigns unknown option '" + name + "'");
    }
    (void)value;
  }
  std::vector<ValueIndex> values;
  values.reserve(space.option_count());
  for (const OptionDomain& opt : space.options()) {
    auto it = assignment.find(opt.name);
    if (it == assignment.end()) {
      throw ValidationError("configuration is missing option '" + opt.name + "'");
    }
    int v = space.value_index(values.size(), it->second);
    if (v < 0) {
      throw ValidationError("option '" + opt.name + "' has no value '" + it->second + "'");
    }
    values.push_back(static_cast<ValueIndex>(v));
  }
  return Configuration(std::move(values));
}

std::string canonical_config_string(const ConfigSpace& space, const Configuration& config) {
  if (config.size() != space.option_count()) {
    throw ValidationError("configuration does not belong to this space");
  }
  std::string out;
  for (OptionIndex i = 0; i < space.option_count(); ++i) {
    if (i > 0) out += ',';
    out += space.option(i).name;
    out += '=';
    out += space.option(i).values.at(config.value_at(i));
  }
  return out;
}

Configuration parse_canonical_config(const ConfigSpace& space, std::string_view text) {
  std::map<std::string, std::string> assignment;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("malformed configuration item '" + std::string(item) + "'");
    }
    auto [it, inserted] =
        assignment.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (!inserted) {
      throw ValidationError("configuration assigns option '" + it->first + "' twice");
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return make_configuration(space, assignment);
}

const std::set<ValueIndex>& SettingSet::values_for(OptionIndex option) const {
  auto it = constraints_.find(option);
  if (it == constraints_.end()) {
    throw ValidationError("option index " + std::to_string(option) + " is unconstrained");
  }
  return it->second;
}

void SettingSet::constrain(const ConfigSpace& space, OptionIndex option,
                           std::set<ValueIndex> values) {
  if (option >= space.option_count()) {
    throw ValidationError("option index " + std::to_string(option) + " out of range");
  }
  const std::size_t domain_size = space.option(option).values.size();
  if (values.empty()) {
    throw ValidationError("empty value set for option '" + space.option(option).name + "'");
  }
  for (ValueIndex v : values) {
    if (v >= domain_size) {
      throw ValidationError("value index out of range for option '" + space.option(option).name +
                            "'");
    }
  }
  if (values.size() == domain_size) {
    constraints_.erase(option);  // full domain: unconstrained
    return;
  }
  constraints_[option] = std::move(values);
}

SettingSet SettingSet::negated(const ConfigSpace& space) const {
  SettingSet out;
  for (const auto& [option, values] : constraints_) {
    std::set<ValueIndex> complement;
    const std::size_t domain_size = space.option(option).values.size();
    for (std::size_t v = 0; v < domain_size; ++v) {
      if (values.count(static_cast<ValueIndex>(v)) == 0) {
        complement.insert(static_cast<ValueIndex>(v));
      }
    }
    out.constraints_[option] = std::move(complement);
  }
  return out;
}

bool SettingSet::contains(const Configuration& config) const {
  for (const auto& [option, values] : constraints_) {
    if (option >= config.size()) {
      throw ValidationError("setting set mentions option index " + std::to_string(option) +
                            " absent from the configuration");
    }
    if (values.count(config.value_at(option)) == 0) return false;
  }
  return true;
}

bool SettingSet::touches(const Configuration& config) const {
  for (const auto& [option, values] : constraints_) {
    if (option >= config.size()) {
      throw ValidationError("setting set mentions option index " + std::to_string(option) +
                            " absent from the configuration");
    }
    if (values.count(config.value_at(option)) != 0) return true;
  }
  return false;
}

SettingSet pointwise_union(const ConfigSpace& space, std::span<const Configuration> configs) {
  if (configs.empty()) {
    throw ValidationError("pointwise_union requires at least one configuration");
  }
  SettingSet out;
  for (OptionIndex option = 0; option < space.option_count(); ++option) {
    std::set<ValueIndex> values;
    for (const Configuration& config : configs) {
      if (config.size() != space.option_count()) {
        throw ValidationError("pointwise_union: configuration does not belong to this space");
      }
      values.insert(config.value_at(option));
    }
    out.constrain(space, option, std::move(values));  // drops full-domain sets
  }
  return out;
}

std::vector<Configuration> one_way_covering_array(const ConfigSpace& space, Rng& rng) {
  std::size_t rows = 0;
  for (const OptionDomain& opt : space.options()) {
    rows = std::max(rows, opt.values.size());
  }
  // Shuffle each column's values, then cycle them down the rows.
  std::vector<std::vector<ValueIndex>> columns;
  columns.reserve(space.option_count());
  for (const OptionDomain& opt : space.options()) {
    std::vector<ValueIndex> column(opt.values.size());
    for (std::size_t v = 0; v < column.size(); ++v) column[v] = static_cast<ValueIndex>(v);
    rng.shuffle(column);
    columns.push_back(std::move(column));
  }
  std::vector<Configuration> out;
  std::set<Configuration> seen;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<ValueIndex> values(space.option_count());
    for (OptionIndex o = 0; o < space.option_count(); ++o) {
      values[o] = columns[o][r % columns[o].size()];
    }
    Configuration config(std::move(values));
    if (seen.insert(config).second) out.push_back(std::move(config));
  }
  return out;
}

std::vector<Configuration> all_configurations(const ConfigSpace& space, std::uint64_t cap) {
  std::uint64_t size = 0;
  if (!space.space_size_at_most(cap, &size)) {
    throw ValidationError("refusing to enumerate " + space.space_size_decimal() +
                          " configurations (cap is " + std::to_string(cap) + ")");
  }
  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>(size));
  std::vector<OptionIndex> options(space.option_count());
  for (OptionIndex i = 0; i < options.size(); ++i) options[i] = i;
  for_each_assignment(space, options, [&](const Configuration& config) {
    out.push_back(config);
    return true;
  });
  return out;
}

Configuration complete_randomly(const SettingSet& partial, const ConfigSpace& space, Rng& rng) {
  std::vector<ValueIndex> values(space.option_count());
  for (OptionIndex option = 0; option < space.option_count(); ++option) {
    if (partial.constrains(option)) {
      const std::set<ValueIndex>& allowed = partial.values_for(option);
      std::size_t pick = rng.below(allowed.size());
      auto it = allowed.begin();
      std::advance(it, pick);
      values[option] = *it;
    } else {
      values[option] =
          static_cast<ValueIndex>(rng.below(space.option(option).values.size()));
    }
  }
  return Configuration(std::move(values));
}

}  // namespace covinfer
