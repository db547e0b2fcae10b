#ifndef COVINFER_FORMULA_HPP
#define COVINFER_FORMULA_HPP

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "covinfer/config_space.hpp"
#include "covinfer/interaction.hpp"

namespace covinfer {

/// Boolean formula over option membership constraints with arbitrary nesting.
/// Strictly more expressive than the four interaction templates, so subjects
/// can carry ground truths the templates cannot express.
struct FormulaAst {
  enum class Node { True, False, Membership, Not, And, Or };

  Node node = Node::True;
  OptionIndex option = 0;          // Membership
  std::set<ValueIndex> values;     // Membership
  std::vector<FormulaAst> children;

  static FormulaAst constant(bool value) {
    FormulaAst ast;
    ast.node = value ? Node::True : Node::False;
    return ast;
  }
  static FormulaAst membership(OptionIndex option, std::set<ValueIndex> values) {
    FormulaAst ast;
    ast.node = Node::Membership;
    ast.option = option;
    ast.values = std::move(values);
    return ast;
  }
  static FormulaAst negation(FormulaAst child) {
    FormulaAst ast;
    ast.node = Node::Not;
    ast.children.push_back(std::move(child));
    return ast;
  }
  static FormulaAst conjunction(std::vector<FormulaAst> children) {
    FormulaAst ast;
    ast.node = Node::And;
    ast.children = std::move(children);
    return ast;
  }
  static FormulaAst disjunction(std::vector<FormulaAst> children) {
    FormulaAst ast;
    ast.node = Node::Or;
    ast.children = std::move(children);
    return ast;
  }
};

bool evaluate(const FormulaAst& ast, const Configuration& config);
std::set<OptionIndex> mentioned_options(const FormulaAst& ast);

/// Parses the textual grammar: `true`, `false`, `name`, `!name` (or `¬name`),
/// `name in {v1,v2}` (or `name∈{v1,v2}`), infix `&&`/`∧` and `||`/`∨`,
/// parentheses; whitespace-insensitive. Bare `name` means membership of "1"
/// and requires a domain containing that token. Option names and values are
/// validated against the space.
FormulaAst parse_formula(const ConfigSpace& space, std::string_view text);

/// Coerces a formula into one of the interaction templates. Throws
/// ValidationError when the shape does not fit (e.g. nested mixes).
Interaction to_interaction(const ConfigSpace& space, const FormulaAst& ast);

/// Parses a rendered final result: a single template, or a top-level
/// conjunction of parenthesized template parts.
FinalResult parse_final_result(const ConfigSpace& space, std::string_view text);

}  // namespace covinfer

#endif
