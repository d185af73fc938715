#pragma once
// Labeled training-pair generation over gold-annotated documents.
//
// Two strategies: the default pairs every mention with every other mention;
// the reduced strategy keeps, per anaphor, one positive with its nearest
// gold antecedent plus one negative per mention in between. The reduced
// scheme is an approximation flagged as such in its metadata tag.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "coref/corpus.hpp"

namespace coref {

struct PairExample {
  std::string doc_id;
  std::string antecedent_id;  // strictly earlier in document order
  std::string anaphor_id;
  int label = 0;  // 1 = corefer
};

inline constexpr const char* kReducedStrategyTag = "reduced (nearest-antecedent approximation)";

namespace detail {

// mention index -> entity index, -1 for singletons.
inline std::vector<int> entity_of_mentions(const CorpusDocument& doc) {
  std::map<std::string, int> by_id;
  for (size_t e = 0; e < doc.entities.size(); ++e)
    for (const std::string& id : doc.entities[e]) by_id[id] = int(e);
  std::vector<int> out(doc.mentions.size(), -1);
  for (size_t i = 0; i < doc.mentions.size(); ++i) {
    auto it = by_id.find(doc.mentions[i].id);
    if (it != by_id.end()) out[i] = it->second;
  }
  return out;
}

}  // namespace detail

// All n*(n-1)/2 unordered pairs, oriented earlier -> later.
inline std::vector<PairExample> generate_pairs_default(const CorpusDocument& doc) {
  const std::vector<int> entity = detail::entity_of_mentions(doc);
  std::vector<PairExample> pairs;
  const size_t n = doc.mentions.size();
  pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (size_t b = 1; b < n; ++b) {
    for (size_t a = 0; a < b; ++a) {
      PairExample p;
      p.doc_id = doc.doc_id;
      p.antecedent_id = doc.mentions[a].id;
      p.anaphor_id = doc.mentions[b].id;
      p.label = (entity[a] >= 0 && entity[a] == entity[b]) ? 1 : 0;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

// Nearest gold antecedent plus intervening negatives, per anaphor.
inline std::vector<PairExample> generate_pairs_reduced(const CorpusDocument& doc) {
  const std::vector<int> entity = detail::entity_of_mentions(doc);
  std::vector<PairExample> pairs;
  const size_t n = doc.mentions.size();
  for (size_t b = 0; b < n; ++b) {
    if (entity[b] < 0) continue;
    int nearest = -1;
    for (int a = int(b) - 1; a >= 0; --a) {
      if (entity[a] == entity[b]) {
        nearest = a;
        break;
      }
    }
    if (nearest < 0) continue;  // first mention of its entity
    for (size_t a = size_t(nearest); a < b; ++a) {
      PairExample p;
      p.doc_id = doc.doc_id;
      p.antecedent_id = doc.mentions[a].id;
      p.anaphor_id = doc.mentions[b].id;
      p.label = (entity[a] >= 0 && entity[a] == entity[b]) ? 1 : 0;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

struct ClassBalance {
  size_t positives = 0;
  size_t negatives = 0;
  // negatives/positives; +inf when positives == 0 with negatives present,
  // NaN when the pair list is empty.
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

inline ClassBalance class_balance(const std::vector<PairExample>& pairs) {
  ClassBalance b;
  for (const PairExample& p : pairs) (p.label == 1 ? b.positives : b.negatives)++;
  if (b.positives > 0)
    b.ratio = double(b.negatives) / double(b.positives);
  else if (b.negatives > 0)
    b.ratio = std::numeric_limits<double>::infinity();
  return b;
}

}  // namespace coref
