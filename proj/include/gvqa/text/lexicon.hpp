#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gvqa::text {

enum class Role { kIrrelevant = 0, kCause = 1, kEffect = 2 };

inline std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline const char* role_name(Role r) {
  switch (r) {
    case Role::kCause: return "cause";
    case Role::kEffect: return "effect";
    default: return "irrelevant";
  }
}

// Causal trigger words plus a small word -> role dictionary. Lookups are
// case-insensitive. The default role entries give each trigger the role of
// the clause it introduces.
struct TriggerLexicon {
  std::set<std::string> triggers;
  std::map<std::string, Role> role_dict;

  static TriggerLexicon defaults() {
    TriggerLexicon lex;
    lex.triggers = {"because", "cause", "causes", "so", "therefore", "since", "leads", "why"};
    lex.role_dict = {{"because", Role::kCause}, {"cause", Role::kCause},
                     {"causes", Role::kCause},  {"since", Role::kCause},
                     {"so", Role::kEffect},     {"therefore", Role::kEffect},
                     {"leads", Role::kEffect},  {"why", Role::kEffect}};
    return lex;
  }

  bool is_trigger(const std::string& token) const {
    return triggers.count(to_lower(token)) > 0;
  }

  bool dict_role(const std::string& token, Role* out) const {
    auto it = role_dict.find(to_lower(token));
    if (it == role_dict.end()) return false;
    *out = it->second;
    return true;
  }

  void validate() const {
    if (triggers.empty()) throw std::invalid_argument("TriggerLexicon: empty trigger set");
  }
};

inline Role parse_role(const std::string& s) {
  std::string low = to_lower(s);
  if (low == "cause") return Role::kCause;
  if (low == "effect") return Role::kEffect;
  if (low == "irrelevant") return Role::kIrrelevant;
  throw std::invalid_argument("unknown role: " + s);
}

// Lexicon file: one token per line; `word<TAB>role` lines add to role_dict.
inline TriggerLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("lexicon: cannot open " + path);
  TriggerLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      lex.triggers.insert(to_lower(line));
    } else {
      std::string word = to_lower(line.substr(0, tab));
      lex.role_dict[word] = parse_role(line.substr(tab + 1));
    }
  }
  lex.validate();
  return lex;
}

}  // namespace gvqa::text
