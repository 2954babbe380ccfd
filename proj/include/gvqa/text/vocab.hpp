#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvqa::text {

// Insertion-ordered token <-> id map.
class Vocab {
 public:
  int add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    index_[token] = id;
    tokens_.push_back(token);
    return id;
  }

  int id(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) throw std::out_of_range("vocab: unknown token '" + token + "'");
    return it->second;
  }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  const std::string& token(int id) const {
    if (id < 0 || id >= static_cast<int>(tokens_.size()))
      throw std::out_of_range("vocab: id out of range");
    return tokens_[static_cast<size_t>(id)];
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::map<std::string, int> index_;
  std::vector<std::string> tokens_;
};

}  // namespace gvqa::text
