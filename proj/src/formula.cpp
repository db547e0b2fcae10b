#include "covinfer/formula.hpp"

#include <algorithm>
#include <cctype>

namespace covinfer {

bool evaluate(const FormulaAst& ast, const Configuration& config) {
  switch (ast.node) {
    case FormulaAst::Node::True:
      return true;
    case FormulaAst::Node::False:
      return false;
    case FormulaAst::Node::Membership:
      if (ast.option >= config.size()) {
        throw ValidationError("formula mentions option index " + std::to_string(ast.option) +
                              " absent from the configuration");
      }
      return ast.values.count(config.value_at(ast.option)) != 0;
    case FormulaAst::Node::Not:
      return !evaluate(ast.children.front(), config);
    case FormulaAst::Node::And:
      for (const FormulaAst& child : ast.children) {
        if (!evaluate(child, config)) return false;
      }
      return true;
    case FormulaAst::Node::Or:
      for (const FormulaAst& child : ast.children) {
        if (evaluate(child, config)) return true;
      }
      return false;
  }
  return false;
}

std::set<OptionIndex> mentioned_options(const FormulaAst& ast) {
  std::set<OptionIndex> out;
  if (ast.node == FormulaAst::Node::Membership) {
    out.insert(ast.option);
  }
  for (const FormulaAst& child : ast.children) {
    std::set<OptionIndex> inner = mentioned_options(child);
    out.insert(inner.begin(), inner.end());
  }
  return out;
}

namespace {

struct Token {
  enum class Kind { Name, And, Or, Not, In, LBrace, RBrace, LParen, RParen, Comma, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '+' ||
         c == '-';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) {
      current_ = {Token::Kind::End, "", start};
      return;
    }
    if (match("&&") || match("∧")) {
      current_ = {Token::Kind::And, "&&", start};
      return;
    }
    if (match("||") || match("∨")) {
      current_ = {Token::Kind::Or, "||", start};
      return;
    }
    if (match("!") || match("¬")) {
      current_ = {Token::Kind::Not, "!", start};
      return;
    }
    if (match("∈")) {
      current_ = {Token::Kind::In, "in", start};
      return;
    }
    const char c = text_[pos_];
    if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',') {
      ++pos_;
      Token::Kind kind = c == '{'   ? Token::Kind::LBrace
                         : c == '}' ? Token::Kind::RBrace
                         : c == '(' ? Token::Kind::LParen
                         : c == ')' ? Token::Kind::RParen
                                    : Token::Kind::Comma;
      current_ = {kind, std::string(1, c), start};
      return;
    }
    if (is_word_char(c)) {
      std::size_t end = pos_;
      while (end < text_.size() && is_word_char(text_[end])) ++end;
      std::string word(text_.substr(pos_, end - pos_));
      pos_ = end;
      if (word == "in") {
        current_ = {Token::Kind::In, word, start};
      } else {
        current_ = {Token::Kind::Name, word, start};
      }
      return;
    }
    throw ValidationError("unexpected character '" + std::string(1, c) + "' at position " +
                          std::to_string(start));
  }

  bool match(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) == literal) {
      pos_ += literal.size();
      return true;
    }
    return false;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_{Token::Kind::End, "", 0};
};

class Parser {
 public:
  Parser(const ConfigSpace& space, std::string_view text) : space_(space), lexer_(text) {}

  FormulaAst parse() {
    FormulaAst ast = parse_or();
    if (lexer_.peek().kind != Token::Kind::End) {
      throw ValidationError("trailing input at position " + std::to_string(lexer_.peek().pos));
    }
    return ast;
  }

 private:
  FormulaAst parse_or() {
    std::vector<FormulaAst> children;
    children.push_back(parse_and());
    while (lexer_.peek().kind == Token::Kind::Or) {
      lexer_.take();
      children.push_back(parse_and());
    }
    if (children.size() == 1) return std::move(children.front());
    return FormulaAst::disjunction(std::move(children));
  }

  FormulaAst parse_and() {
    std::vector<FormulaAst> children;
    children.push_back(parse_unary());
    while (lexer_.peek().kind == Token::Kind::And) {
      lexer_.take();
      children.push_back(parse_unary());
    }
    if (children.size() == 1) return std::move(children.front());
    return FormulaAst::conjunction(std::move(children));
  }

  FormulaAst parse_unary() {
    if (lexer_.peek().kind == Token::Kind::Not) {
      lexer_.take();
      return FormulaAst::negation(parse_unary());
    }
    return parse_primary();
  }

  FormulaAst parse_primary() {
    Token token = lexer_.take();
    switch (token.kind) {
      case Token::Kind::LParen: {
        FormulaAst inner = parse_or();
        expect(Token::Kind::RParen, ")");
        return inner;
      }
      case Token::Kind::Name: {
        if (token.text == "true") return FormulaAst::constant(true);
        if (token.text == "false") return FormulaAst::constant(false);
        return parse_atom(token);
      }
      default:
        throw ValidationError("expected a formula at position " + std::to_string(token.pos));
    }
  }

  FormulaAst parse_atom(const Token& name) {
    int option = space_.option_index(name.text);
    if (option < 0) {
      throw ValidationError("unknown option '" + name.text + "' at position " +
                            std::to_string(name.pos));
    }
    if (lexer_.peek().kind == Token::Kind::In) {
      lexer_.take();
      expect(Token::Kind::LBrace, "{");
      std::set<ValueIndex> values;
      while (true) {
        Token value = lexer_.take();
        if (value.kind != Token::Kind::Name) {
          throw ValidationError("expected a value token at position " +
                                std::to_string(value.pos));
        }
        int v = space_.value_index(static_cast<OptionIndex>(option), value.text);
        if (v < 0) {
          throw ValidationError("option '" + name.text + "' has no value '" + value.text + "'");
        }
        values.insert(static_cast<ValueIndex>(v));
        Token next = lexer_.take();
        if (next.kind == Token::Kind::RBrace) break;
        if (next.kind != Token::Kind::Comma) {
          throw ValidationError("expected ',' or '}' at position " + std::to_string(next.pos));
        }
      }
      return FormulaAst::membership(static_cast<OptionIndex>(option), std::move(values));
    }
    // Bare option name: membership of the token "1".
    int v = space_.value_index(static_cast<OptionIndex>(option), "1");
    if (v < 0) {
      throw ValidationError("option '" + name.text +
                            "' has no value '1'; use an explicit membership set");
    }
    return FormulaAst::membership(static_cast<OptionIndex>(option), {static_cast<ValueIndex>(v)});
  }

  void expect(Token::Kind kind, const char* what) {
    Token token = lexer_.take();
    if (token.kind != kind) {
      throw ValidationError("expected '" + std::string(what) + "' at position " +
                            std::to_string(token.pos));
    }
  }

  const ConfigSpace& space_;
  Lexer lexer_;
};

/// Pushes negations down to atoms and flattens same-operator nests; the
/// result has Not only around nothing (complements folded into memberships).
FormulaAst normalize(const ConfigSpace& space, const FormulaAst& ast, bool negate) {
  switch (ast.node) {
    case FormulaAst::Node::True:
      return FormulaAst::constant(!negate);
    case FormulaAst::Node::False:
      return FormulaAst::constant(negate);
    case FormulaAst::Node::Not:
      return normalize(space, ast.children.front(), !negate);
    case FormulaAst::Node::Membership: {
      if (!negate) return ast;
      std::set<ValueIndex> complement;
      const std::size_t domain_size = space.option(ast.option).values.size();
      for (std::size_t v = 0; v < domain_size; ++v) {
        if (ast.values.count(static_cast<ValueIndex>(v)) == 0) {
          complement.insert(static_cast<ValueIndex>(v));
        }
      }
      if (complement.empty()) return FormulaAst::constant(false);
      return FormulaAst::membership(ast.option, std::move(complement));
    }
    case FormulaAst::Node::And:
    case FormulaAst::Node::Or: {
      const bool is_and = (ast.node == FormulaAst::Node::And) != negate;
      std::vector<FormulaAst> children;
      for (const FormulaAst& child : ast.children) {
        FormulaAst normalized = normalize(space, child, negate);
        if ((normalized.node == FormulaAst::Node::And && is_and) ||
            (normalized.node == FormulaAst::Node::Or && !is_and)) {
          for (FormulaAst& grandchild : normalized.children) {
            children.push_back(std::move(grandchild));
          }
        } else {
          children.push_back(std::move(normalized));
        }
      }
      if (children.size() == 1) return std::move(children.front());
      return is_and ? FormulaAst::conjunction(std::move(children))
                    : FormulaAst::disjunction(std::move(children));
    }
  }
  return FormulaAst::constant(true);
}

/// Merges membership atoms into a core (intersection per option). Returns
/// false when some option's intersection is empty (unsatisfiable).
bool collect_core(const ConfigSpace& space, const std::vector<const FormulaAst*>& atoms,
                  SettingSet* out) {
  std::map<OptionIndex, std::set<ValueIndex>> merged;
  for (const FormulaAst* atom : atoms) {
    auto it = merged.find(atom->option);
    if (it == merged.end()) {
      merged.emplace(atom->option, atom->values);
      continue;
    }
    std::set<ValueIndex> intersection;
    std::set_intersection(it->second.begin(), it->second.end(), atom->values.begin(),
                          atom->values.end(), std::inserter(intersection, intersection.begin()));
    if (intersection.empty()) return false;
    it->second = std::move(intersection);
  }
  for (auto& [option, values] : merged) {
    out->constrain(space, option, std::move(values));
  }
  return true;
}

/// Merges membership atoms into clauses (union per option). Returns false
/// when some option's union covers the whole domain (the disjunct is a
/// tautology).
bool collect_clauses(const ConfigSpace& space, const std::vector<const FormulaAst*>& atoms,
                     SettingSet* out) {
  std::map<OptionIndex, std::set<ValueIndex>> merged;
  for (const FormulaAst* atom : atoms) {
    merged[atom->option].insert(atom->values.begin(), atom->values.end());
  }
  for (auto& [option, values] : merged) {
    if (values.size() == space.option(option).values.size()) return false;
    out->constrain(space, option, std::move(values));
  }
  return true;
}

Interaction coerce(const ConfigSpace& space, const FormulaAst& ast) {
  switch (ast.node) {
    case FormulaAst::Node::True:
      return Interaction::boolean_true();
    case FormulaAst::Node::False:
      return Interaction::contradiction();
    case FormulaAst::Node::Membership: {
      if (ast.values.size() == space.option(ast.option).values.size()) {
        return Interaction::boolean_true();
      }
      SettingSet core;
      core.constrain(space, ast.option, ast.values);
      return Interaction::make_conj(std::move(core));
    }
    case FormulaAst::Node::Not:
      throw ValidationError("internal: negation not normalized");
    case FormulaAst::Node::And: {
      std::vector<const FormulaAst*> atoms;
      const FormulaAst* disjunct = nullptr;
      for (const FormulaAst& child : ast.children) {
        if (child.node == FormulaAst::Node::Membership) {
          atoms.push_back(&child);
        } else if (child.node == FormulaAst::Node::Or && disjunct == nullptr) {
          disjunct = &child;
        } else if (child.node == FormulaAst::Node::True) {
          continue;
        } else if (child.node == FormulaAst::Node::False) {
          return Interaction::contradiction();
        } else {
          throw ValidationError("formula does not fit an interaction template");
        }
      }
      SettingSet core;
      if (!collect_core(space, atoms, &core)) return Interaction::contradiction();
      if (disjunct == nullptr) return Interaction::make_conj(std::move(core));
      std::vector<const FormulaAst*> clause_atoms;
      for (const FormulaAst& child : disjunct->children) {
        if (child.node != FormulaAst::Node::Membership) {
          throw ValidationError("formula does not fit an interaction template");
        }
        clause_atoms.push_back(&child);
      }
      SettingSet clauses;
      if (!collect_clauses(space, clause_atoms, &clauses)) {
        return Interaction::make_conj(std::move(core));  // tautological disjunct
      }
      return Interaction::make_conjdisj(space, std::move(core), std::move(clauses));
    }
    case FormulaAst::Node::Or: {
      std::vector<const FormulaAst*> atoms;
      const FormulaAst* conjunct = nullptr;
      for (const FormulaAst& child : ast.children) {
        if (child.node == FormulaAst::Node::Membership) {
          atoms.push_back(&child);
        } else if (child.node == FormulaAst::Node::And && conjunct == nullptr) {
          conjunct = &child;
        } else if (child.node == FormulaAst::Node::False) {
          continue;
        } else if (child.node == FormulaAst::Node::True) {
          return Interaction::boolean_true();
        } else {
          throw ValidationError("formula does not fit an interaction template");
        }
      }
      SettingSet clauses;
      if (!collect_clauses(space, atoms, &clauses)) return Interaction::boolean_true();
      if (conjunct == nullptr) return Interaction::make_disj(std::move(clauses));
      std::vector<const FormulaAst*> core_atoms;
      for (const FormulaAst& child : conjunct->children) {
        if (child.node != FormulaAst::Node::Membership) {
          throw ValidationError("formula does not fit an interaction template");
        }
        core_atoms.push_back(&child);
      }
      SettingSet core;
      if (!collect_core(space, core_atoms, &core)) {
        return Interaction::make_disj(std::move(clauses));  // unsatisfiable conjunct
      }
      return Interaction::make_disjconj(space, std::move(clauses), std::move(core));
    }
  }
  return Interaction::boolean_true();
}

}  // namespace

FormulaAst parse_formula(const ConfigSpace& space, std::string_view text) {
  return Parser(space, text).parse();
}

Interaction to_interaction(const ConfigSpace& space, const FormulaAst& ast) {
  return coerce(space, normalize(space, ast, false));
}

FinalResult parse_final_result(const ConfigSpace& space, std::string_view text) {
  FormulaAst raw = parse_formula(space, text);
  if (raw.node != FormulaAst::Node::And) {
    return make_final_result({to_interaction(space, raw)});
  }
  // Children of the raw top-level conjunction keep their parenthesized
  // structure. With at most one disjunctive child and no conjunctive group
  // the whole formula is a single template; otherwise each group becomes its
  // own part and loose atoms merge into one conjunctive part.
  std::vector<FormulaAst> children;
  children.reserve(raw.children.size());
  for (const FormulaAst& child : raw.children) {
    children.push_back(normalize(space, child, false));
  }
  std::size_t or_children = 0;
  bool has_and_group = false;
  for (const FormulaAst& child : children) {
    if (child.node == FormulaAst::Node::Or) ++or_children;
    if (child.node == FormulaAst::Node::And) has_and_group = true;
  }
  if (!has_and_group && or_children <= 1) {
    return make_final_result({to_interaction(space, raw)});
  }
  std::vector<Interaction> parts;
  std::vector<FormulaAst> loose;
  for (FormulaAst& child : children) {
    if (child.node == FormulaAst::Node::And || child.node == FormulaAst::Node::Or) {
      parts.push_back(coerce(space, child));
    } else {
      loose.push_back(std::move(child));
    }
  }
  if (!loose.empty()) {
    parts.push_back(coerce(space, loose.size() == 1
                                      ? loose.front()
                                      : FormulaAst::conjunction(std::move(loose))));
  }
  return make_final_result(std::move(parts));
}

}  // namespace covinfer
