#pragma once

// Whitespace + punctuation tokenizer with a protected-word list so lexicon
// triggers and special tags survive segmentation whole.

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "gvqa/text/lexicon.hpp"

namespace gvqa::text {

inline constexpr const char* kCauseTag = "[CAUSE]";
inline constexpr const char* kEffectTag = "[EFFECT]";
inline constexpr const char* kMaskTag = "[MASK]";

inline bool is_special_tag(const std::string& tok) {
  return tok == kCauseTag || tok == kEffectTag || tok == kMaskTag;
}

inline bool is_punct_char(char c) {
  return c == '.' || c == ',' || c == '?' || c == '!' || c == ';' || c == ':';
}

inline std::vector<std::string> tokenize(const std::string& s, const TriggerLexicon& lexicon) {
  std::vector<std::string> tokens;
  std::string chunk;
  auto flush_chunk = [&]() {
    if (chunk.empty()) return;
    if (is_special_tag(chunk) || lexicon.triggers.count(to_lower(chunk))) {
      tokens.push_back(chunk);
      chunk.clear();
      return;
    }
    // Split leading/trailing punctuation off the core word.
    size_t begin = 0, end = chunk.size();
    while (begin < end && is_punct_char(chunk[begin])) tokens.push_back(std::string(1, chunk[begin++]));
    std::vector<std::string> trailing;
    while (end > begin && is_punct_char(chunk[end - 1])) trailing.push_back(std::string(1, chunk[--end]));
    if (end > begin) tokens.push_back(chunk.substr(begin, end - begin));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) tokens.push_back(*it);
    chunk.clear();
  };
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush_chunk();
    } else {
      chunk.push_back(c);
    }
  }
  flush_chunk();
  return tokens;
}

// Inverse up to whitespace normalization: punctuation reattaches to the
// preceding token.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    bool attach = tok.size() == 1 && is_punct_char(tok[0]);
    if (!out.empty() && !attach) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace gvqa::text
