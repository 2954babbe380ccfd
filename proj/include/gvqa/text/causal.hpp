#pragma once

// Causal question encoding: intent tags, the trigger mask C_mask, per-token
// cause/effect/irrelevant roles, role-composed position encodings, the
// masked-trigger pretext, and trigger-preserving dropout.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvqa/text/lexicon.hpp"
#include "gvqa/text/tokenizer.hpp"
#include "gvqa/text/vocab.hpp"

namespace gvqa::text {

struct CausalText {
  std::vector<std::string> tokens;
  std::vector<int> ids;          // empty until a vocab is attached
  std::vector<uint8_t> c_mask;   // 1 at trigger positions
  std::vector<Role> roles;
  std::vector<std::vector<double>> embeddings;  // filled by the model
};

struct RoleEmbedding {
  std::vector<double> e_cause;
  std::vector<double> e_effect;

  int dim() const { return static_cast<int>(e_cause.size()); }
  void validate() const {
    if (e_cause.size() != e_effect.size())
      throw std::invalid_argument("RoleEmbedding: dimension mismatch");
  }
};

inline std::string wrap_causal_intent(const std::string& question) {
  return std::string(kCauseTag) + " " + question + " " + kEffectTag;
}

// c_mask[i] = 1 iff tokens[i] is a lexicon trigger; special tags are never
// triggers.
inline std::vector<uint8_t> detect_triggers(const std::vector<std::string>& tokens,
                                            const TriggerLexicon& lexicon) {
  std::vector<uint8_t> mask(tokens.size(), 0);
  for (size_t i = 0; i < tokens.size(); ++i)
    if (!is_special_tag(tokens[i]) && lexicon.is_trigger(tokens[i])) mask[i] = 1;
  return mask;
}

// Role per token: dictionary entries win; otherwise tokens between the
// [CAUSE]-side start and the final trigger default to the cause side, tokens
// after the final trigger to the effect side, and a trigger without a
// dictionary entry takes the role of the clause it introduces. No triggers
// at all means everything non-dictionary is irrelevant.
inline std::vector<Role> assign_roles(const std::vector<std::string>& tokens,
                                      const TriggerLexicon& lexicon) {
  std::vector<Role> roles(tokens.size(), Role::kIrrelevant);
  auto c_mask = detect_triggers(tokens, lexicon);
  int last_trigger = -1;
  for (size_t i = 0; i < tokens.size(); ++i)
    if (c_mask[i]) last_trigger = static_cast<int>(i);
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (is_special_tag(tokens[i])) continue;
    Role dict_role;
    if (lexicon.dict_role(tokens[i], &dict_role)) {
      roles[i] = dict_role;
      continue;
    }
    if (last_trigger < 0) continue;
    if (c_mask[i]) {
      roles[i] = static_cast<int>(i) == last_trigger ? Role::kEffect : Role::kCause;
    } else {
      roles[i] = static_cast<int>(i) < last_trigger ? Role::kCause : Role::kEffect;
    }
  }
  return roles;
}

inline CausalText encode_causal_text(const std::string& question, const TriggerLexicon& lexicon) {
  CausalText out;
  out.tokens = tokenize(wrap_causal_intent(question), lexicon);
  out.c_mask = detect_triggers(out.tokens, lexicon);
  out.roles = assign_roles(out.tokens, lexicon);
  return out;
}

inline void attach_ids(CausalText& text, const Vocab& vocab) {
  text.ids.clear();
  text.ids.reserve(text.tokens.size());
  for (const auto& tok : text.tokens) text.ids.push_back(vocab.id(tok));
}

inline std::vector<double> sinusoidal_position(int position, int dim) {
  std::vector<double> pe(static_cast<size_t>(dim), 0.0);
  for (int i = 0; i < dim; i += 2) {
    double freq = std::pow(10000.0, -static_cast<double>(i) / dim);
    pe[static_cast<size_t>(i)] = std::sin(position * freq);
    if (i + 1 < dim) pe[static_cast<size_t>(i + 1)] = std::cos(position * freq);
  }
  return pe;
}

// Sinusoidal base position vector plus the causal role vector; irrelevant
// adds the zero vector.
inline std::vector<double> compose_position_encoding(int position, Role role,
                                                     const RoleEmbedding& roles, int dim) {
  roles.validate();
  if (roles.dim() != dim)
    throw std::invalid_argument("compose_position_encoding: dimension mismatch");
  auto pe = sinusoidal_position(position, dim);
  const std::vector<double>* rv = nullptr;
  if (role == Role::kCause) rv = &roles.e_cause;
  if (role == Role::kEffect) rv = &roles.e_effect;
  if (rv)
    for (int i = 0; i < dim; ++i) pe[static_cast<size_t>(i)] += (*rv)[static_cast<size_t>(i)];
  return pe;
}

struct PretextSample {
  CausalText masked;                // tokens with [MASK] at chosen trigger slots
  std::vector<int> masked_positions;
  std::vector<Role> labels;         // original roles at the masked positions
};

// Each trigger position is masked independently with probability p;
// deterministic per seed.
inline PretextSample mask_triggers_pretext(const CausalText& text, double p, uint64_t seed,
                                           int mask_id = -1) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("mask_triggers_pretext: p in [0,1]");
  PretextSample out;
  out.masked = text;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (size_t i = 0; i < text.tokens.size(); ++i) {
    if (!text.c_mask[i]) continue;
    if (coin(rng) < p) {
      out.masked.tokens[i] = kMaskTag;
      if (!out.masked.ids.empty()) {
        if (mask_id < 0) throw std::invalid_argument("mask_triggers_pretext: mask_id required");
        out.masked.ids[i] = mask_id;
      }
      out.masked_positions.push_back(static_cast<int>(i));
      out.labels.push_back(text.roles[i]);
    }
  }
  return out;
}

// Mean cross-entropy of 3-class role scores at masked positions; zero
// positions give zero loss.
inline double causal_cls_loss(const std::vector<std::array<double, 3>>& logits,
                              const std::vector<Role>& labels) {
  if (logits.size() != labels.size())
    throw std::invalid_argument("causal_cls_loss: logits/labels misaligned");
  if (logits.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    double mx = std::max({logits[i][0], logits[i][1], logits[i][2]});
    double lse = 0.0;
    for (double z : logits[i]) lse += std::exp(z - mx);
    lse = mx + std::log(lse);
    total += lse - logits[i][static_cast<size_t>(static_cast<int>(labels[i]))];
  }
  return total / logits.size();
}

// Inverted dropout on non-trigger positions; trigger rows pass through
// bit-identical (their RNG is never consumed).
inline std::vector<std::vector<double>> dropout_preserving_triggers(
    const std::vector<std::vector<double>>& embeddings, const std::vector<uint8_t>& c_mask,
    double p, uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
  if (embeddings.size() != c_mask.size())
    throw std::invalid_argument("dropout: c_mask size mismatch");
  std::vector<std::vector<double>> out = embeddings;
  if (p == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double keep_scale = 1.0 / (1.0 - p);
  for (size_t i = 0; i < out.size(); ++i) {
    if (c_mask[i]) continue;
    for (auto& v : out[i]) v = coin(rng) < p ? 0.0 : v * keep_scale;
  }
  return out;
}

}  // namespace gvqa::text
