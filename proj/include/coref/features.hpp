#pragma once
// The four feature groups computed over mentions and mention pairs:
// mention word sequences, +/-10 token context windows, the 7 mention
// attribute components, and the 9 pair relation components.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "coref/corpus.hpp"
#include "coref/embeddings.hpp"

namespace coref {

inline constexpr int kContextSize = 10;
inline constexpr int kMinMentionTokens = 4;
// Distances are clipped here and scaled into [0,1] before entering a network.
inline constexpr int kDistanceClip = 63;

struct MentionFeatures {
  bool is_pronoun = false;
  std::array<double, 4> entity_type_onehot{};  // PERSON, ORGANIZATION, LOCATION, OTHER
  bool is_proper_name = false;
  bool is_first_person = false;

  std::array<double, 7> to_vector() const {
    return {is_pronoun ? 1.0 : 0.0,
            entity_type_onehot[0], entity_type_onehot[1],
            entity_type_onehot[2], entity_type_onehot[3],
            is_proper_name ? 1.0 : 0.0,
            is_first_person ? 1.0 : 0.0};
  }
};

struct PairRelationFeatures {
  bool exact_match = false;
  bool same_word_set = false;
  bool substring = false;
  bool abbreviation = false;
  bool appositive = false;
  bool nearest_candidate = false;
  int sentence_distance = 0;
  int word_distance = 0;
  int mention_distance = 0;

  std::array<double, 9> to_input_vector() const {
    auto scaled = [](int d) { return double(std::min(d, kDistanceClip)) / kDistanceClip; };
    return {exact_match ? 1.0 : 0.0,
            same_word_set ? 1.0 : 0.0,
            substring ? 1.0 : 0.0,
            abbreviation ? 1.0 : 0.0,
            appositive ? 1.0 : 0.0,
            nearest_candidate ? 1.0 : 0.0,
            scaled(sentence_distance),
            scaled(word_distance),
            scaled(mention_distance)};
  }
};

struct ContextWindow {
  std::vector<Token> preceding;  // exactly kContextSize, PAD-filled at the front
  std::vector<Token> following;  // exactly kContextSize, PAD-filled at the back
};

struct MentionWordSequence {
  std::vector<Token> tokens;  // right-PAD-padded to >= kMinMentionTokens
};

inline MentionFeatures mention_features(const CorpusDocument&, const Mention& m) {
  MentionFeatures f;
  f.is_pronoun = m.is_pronoun;
  f.entity_type_onehot = {0, 0, 0, 0};
  f.entity_type_onehot[size_t(m.entity_type)] = 1.0;
  f.is_proper_name = m.is_proper_name;
  f.is_first_person = m.is_first_person;
  return f;
}

namespace detail {

// Absolute offset of a token in the flattened document.
inline int absolute_offset(const CorpusDocument& doc, int sentence, int token) {
  int off = 0;
  for (int s = 0; s < sentence; ++s) off += int(doc.sentences[s].size());
  return off + token;
}

inline std::vector<Token> mention_tokens(const CorpusDocument& doc, const Mention& m) {
  const auto& sent = doc.sentences[m.sentence_index];
  return std::vector<Token>(sent.begin() + m.start_token, sent.begin() + m.end_token + 1);
}

inline std::string joined_lower(const CorpusDocument& doc, const Mention& m) {
  std::string out;
  for (int t = m.start_token; t <= m.end_token; ++t) {
    if (!out.empty()) out += ' ';
    out += lowercase(doc.sentences[m.sentence_index][t]);
  }
  return out;
}

inline std::set<std::string> word_set_lower(const CorpusDocument& doc, const Mention& m) {
  std::set<std::string> s;
  for (int t = m.start_token; t <= m.end_token; ++t)
    s.insert(lowercase(doc.sentences[m.sentence_index][t]));
  return s;
}

inline std::string initials_lower(const CorpusDocument& doc, const Mention& m) {
  std::string out;
  for (int t = m.start_token; t <= m.end_token; ++t) {
    const Token& tok = doc.sentences[m.sentence_index][t];
    if (!tok.empty()) out += char(std::tolower(static_cast<unsigned char>(tok[0])));
  }
  return out;
}

}  // namespace detail

inline PairRelationFeatures pair_features(const CorpusDocument& doc, const Mention& antecedent,
                                          const Mention& anaphor) {
  const int ai = doc.mention_order(antecedent.id);
  const int bi = doc.mention_order(anaphor.id);
  if (ai >= bi)
    throw std::invalid_argument("doc '" + doc.doc_id + "': antecedent '" + antecedent.id +
                                "' does not precede anaphor '" + anaphor.id + "'");

  PairRelationFeatures f;
  const std::string sa = detail::joined_lower(doc, antecedent);
  const std::string sb = detail::joined_lower(doc, anaphor);
  f.exact_match = sa == sb;
  f.same_word_set = detail::word_set_lower(doc, antecedent) == detail::word_set_lower(doc, anaphor);
  f.substring = sa.find(sb) != std::string::npos || sb.find(sa) != std::string::npos;

  // One mention is a single token equal to the other's concatenated initials.
  const bool a_single = antecedent.start_token == antecedent.end_token;
  const bool b_single = anaphor.start_token == anaphor.end_token;
  f.abbreviation = (a_single && sa == detail::initials_lower(doc, anaphor)) ||
                   (b_single && sb == detail::initials_lower(doc, antecedent));

  // Comma-adjacency heuristic: "X , Y" within one sentence.
  f.appositive = antecedent.sentence_index == anaphor.sentence_index &&
                 anaphor.start_token == antecedent.end_token + 2 &&
                 doc.sentences[antecedent.sentence_index][antecedent.end_token + 1] == ",";

  f.mention_distance = bi - ai - 1;
  f.nearest_candidate = f.mention_distance == 0;
  f.sentence_distance = std::abs(anaphor.sentence_index - antecedent.sentence_index);

  const int a_end = detail::absolute_offset(doc, antecedent.sentence_index, antecedent.end_token);
  const int b_start = detail::absolute_offset(doc, anaphor.sentence_index, anaphor.start_token);
  f.word_distance = std::max(0, b_start - a_end - 1);  // 0 when nested or adjacent
  return f;
}

inline ContextWindow context_window(const CorpusDocument& doc, const Mention& m) {
  std::vector<Token> flat;
  flat.reserve(doc.total_tokens());
  for (const auto& sent : doc.sentences) flat.insert(flat.end(), sent.begin(), sent.end());

  const int first = detail::absolute_offset(doc, m.sentence_index, m.start_token);
  const int last = detail::absolute_offset(doc, m.sentence_index, m.end_token);

  ContextWindow w;
  w.preceding.assign(kContextSize, kPadToken);
  w.following.assign(kContextSize, kPadToken);
  for (int i = 0; i < kContextSize; ++i) {
    int p = first - kContextSize + i;
    if (p >= 0) w.preceding[i] = flat[p];
    int q = last + 1 + i;
    if (q < int(flat.size())) w.following[i] = flat[q];
  }
  return w;
}

inline MentionWordSequence mention_word_sequence(const CorpusDocument& doc, const Mention& m) {
  MentionWordSequence seq;
  seq.tokens = detail::mention_tokens(doc, m);
  while (int(seq.tokens.size()) < kMinMentionTokens) seq.tokens.push_back(kPadToken);
  return seq;
}

}  // namespace coref
