#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbsynth/error.hpp"

namespace tbsynth {

// Malformed template source: unbalanced blocks, undeclared slots, bad header.
class TemplateSyntaxError : public Error {
 public:
  using Error::Error;
};

class MissingSlot : public Error {
 public:
  explicit MissingSlot(std::string slot)
      : Error("missing template slot '" + slot + "'"), slot_(std::move(slot)) {}
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

// A minimal text template language:
//
//   {{ path }}  {{ path | upper }}          slot substitution (filters: upper lower hex)
//   {% for x in path %} ... {% endfor %}    loop; `loop.index`, `loop.first`, `loop.last`
//   {% if cond %} {% elif cond %} {% else %} {% endif %}
//   {# comment #}
//
// A condition is `[not] path [== "text" | != "text"]`, optionally chained with
// `and` / `or` (evaluated left to right). A block tag alone on its line removes
// the whole line from the output.
//
// Every template starts with a header comment:
//
//   {# @name wishbone_driver
//      @kind driver
//      @scope wishbone
//      @slots design_name clock ports #}
//
// Extra `@key values...` header lines are kept as attributes.
class Template {
 public:
  static Template parse(std::string_view source, std::string origin = "<template>");

  const std::string& name() const { return name_; }
  const std::string& kind() const { return kind_; }
  const std::string& scope() const { return scope_; }
  const std::set<std::string>& required_slots() const { return required_slots_; }
  const std::set<std::string>& referenced_slots() const { return referenced_slots_; }
  const std::vector<std::string>& attribute(const std::string& key) const;
  const std::map<std::string, std::vector<std::string>>& attributes() const { return attributes_; }

  // Throws MissingSlot when a required slot is absent from `context`.
  std::string render(const nlohmann::json& context) const;

  struct Node;

 private:
  std::string origin_;
  std::string name_;
  std::string kind_;
  std::string scope_;
  std::set<std::string> required_slots_;
  std::set<std::string> referenced_slots_;
  std::map<std::string, std::vector<std::string>> attributes_;
  std::shared_ptr<const std::vector<Node>> body_;
};

}  // namespace tbsynth
