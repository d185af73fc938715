#pragma once
// word2vec text-format loader and token -> vector lookup.
//
// Format: first line "V D", then V lines "word v1 ... vD". Words are
// lowercased on ingest; the first occurrence wins on case-fold collisions.
// Lookup of an unknown token (or the PAD pseudo-token) yields the zero
// vector, so inference never fails on vocabulary gaps.

#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coref/corpus.hpp"
#include "coref/rng.hpp"

namespace coref {

inline constexpr const char* kPadToken = "<PAD>";

inline std::string lowercase(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct EmbeddingTable {
  int dim = 0;
  std::map<std::string, int> vocab;  // lowercase token -> row
  std::vector<double> matrix;        // row-major, vocab rows x dim

  const double* row(int r) const { return matrix.data() + size_t(r) * dim; }
};

inline EmbeddingTable load_word2vec_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("embeddings: empty stream");
  long declared_vocab = 0, declared_dim = 0;
  {
    std::istringstream hdr(line);
    if (!(hdr >> declared_vocab >> declared_dim) || declared_vocab < 0 || declared_dim < 1)
      throw std::runtime_error("embeddings: bad header line '" + line + "'");
    std::string extra;
    if (hdr >> extra) throw std::runtime_error("embeddings: bad header line '" + line + "'");
  }

  EmbeddingTable table;
  table.dim = int(declared_dim);
  long lines_read = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == EOF) break;  // tolerate one trailing newline
    ++lines_read;
    if (lines_read > declared_vocab)
      throw std::runtime_error("embeddings: more rows than the header declares");

    size_t pos = line.find(' ');
    if (pos == std::string::npos || pos == 0)
      throw std::runtime_error("embeddings: malformed row '" + line + "'");
    std::string word = lowercase(line.substr(0, pos));

    std::vector<double> values;
    values.reserve(size_t(declared_dim));
    const char* p = line.data() + pos;
    const char* end = line.data() + line.size();
    while (p != end) {
      while (p != end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw std::runtime_error("embeddings: non-numeric component for word '" + word + "'");
      values.push_back(v);
      p = next;
    }
    if (long(values.size()) != declared_dim)
      throw std::runtime_error("embeddings: word '" + word + "' has " +
                               std::to_string(values.size()) + " components, expected " +
                               std::to_string(declared_dim));

    if (table.vocab.count(word)) continue;  // first occurrence wins
    table.vocab[word] = int(table.vocab.size());
    table.matrix.insert(table.matrix.end(), values.begin(), values.end());
  }
  if (lines_read != declared_vocab)
    throw std::runtime_error("embeddings: header declares " + std::to_string(declared_vocab) +
                             " rows, found " + std::to_string(lines_read));
  return table;
}

inline EmbeddingTable load_word2vec_text(const std::string& text) {
  std::istringstream in(text);
  return load_word2vec_text(in);
}

// Writes a row into `out` (length table.dim). Zero for OOV and PAD.
inline void lookup_into(const EmbeddingTable& table, const Token& token, double* out) {
  if (token != kPadToken) {
    auto it = table.vocab.find(lowercase(token));
    if (it != table.vocab.end()) {
      const double* r = table.row(it->second);
      for (int i = 0; i < table.dim; ++i) out[i] = r[i];
      return;
    }
  }
  for (int i = 0; i < table.dim; ++i) out[i] = 0.0;
}

inline std::vector<double> lookup(const EmbeddingTable& table, const Token& token) {
  std::vector<double> v(size_t(table.dim));
  lookup_into(table, token, v.data());
  return v;
}

// Seeded random table; components uniform in [-0.5/dim, 0.5/dim].
inline EmbeddingTable random_table(uint64_t seed, const std::vector<Token>& words, int dim) {
  if (dim < 1) throw std::invalid_argument("random_table: dim must be >= 1");
  if (words.empty()) throw std::invalid_argument("random_table: empty word list");
  EmbeddingTable table;
  table.dim = dim;
  SplitMix64 rng(seed);
  const double bound = 0.5 / dim;
  for (const Token& w : words) {
    std::string key = lowercase(w);
    if (table.vocab.count(key)) continue;
    table.vocab[key] = int(table.vocab.size());
    for (int i = 0; i < dim; ++i) table.matrix.push_back(rng.next_range(-bound, bound));
  }
  return table;
}

// Every distinct token of a corpus, in first-appearance order.
inline std::vector<Token> corpus_vocabulary(const std::vector<CorpusDocument>& docs) {
  std::vector<Token> words;
  std::set<std::string> seen;
  for (const CorpusDocument& doc : docs)
    for (const auto& sent : doc.sentences)
      for (const Token& tok : sent)
        if (seen.insert(lowercase(tok)).second) words.push_back(tok);
  return words;
}

}  // namespace coref
