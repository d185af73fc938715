#pragma once
// Document / mention / entity data model, the JSONL interchange format,
// validation, and a seeded synthetic corpus generator for tests and demos.
//
// One document per line; each line a JSON object with exactly the fields
//   doc_id     : string
//   sentences  : array of arrays of token strings
//   mentions   : array of {id, sentence, start, end, pronoun, etype,
//                          proper, first_person}
//   entities   : array of arrays of mention-id strings (>= 2 members each)
// Unknown fields are rejected. Singleton mentions are simply absent from
// `entities`.

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coref/rng.hpp"

namespace coref {

using Token = std::string;

enum class EntityType { PERSON, ORGANIZATION, LOCATION, OTHER };

inline const char* to_string(EntityType t) {
  switch (t) {
    case EntityType::PERSON: return "PERSON";
    case EntityType::ORGANIZATION: return "ORGANIZATION";
    case EntityType::LOCATION: return "LOCATION";
    case EntityType::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline EntityType entity_type_from_string(const std::string& s) {
  if (s == "PERSON") return EntityType::PERSON;
  if (s == "ORGANIZATION") return EntityType::ORGANIZATION;
  if (s == "LOCATION") return EntityType::LOCATION;
  if (s == "OTHER") return EntityType::OTHER;
  throw std::runtime_error("unknown entity type '" + s + "'");
}

struct Mention {
  std::string id;
  int sentence_index = 0;
  int start_token = 0;  // inclusive
  int end_token = 0;    // inclusive
  bool is_pronoun = false;
  EntityType entity_type = EntityType::OTHER;
  bool is_proper_name = false;
  bool is_first_person = false;
};

// Document-order comparison: (sentence, start, end), id as a final
// deterministic tie-break.
inline bool mention_before(const Mention& a, const Mention& b) {
  if (a.sentence_index != b.sentence_index) return a.sentence_index < b.sentence_index;
  if (a.start_token != b.start_token) return a.start_token < b.start_token;
  if (a.end_token != b.end_token) return a.end_token < b.end_token;
  return a.id < b.id;
}

struct CorpusDocument {
  std::string doc_id;
  std::vector<std::vector<Token>> sentences;
  std::vector<Mention> mentions;  // kept sorted in document order
  std::vector<std::vector<std::string>> entities;

  const Mention& mention_by_id(const std::string& id) const {
    for (const Mention& m : mentions)
      if (m.id == id) return m;
    throw std::runtime_error("doc '" + doc_id + "': unknown mention id '" + id + "'");
  }

  // Position of a mention in document order.
  int mention_order(const std::string& id) const {
    for (size_t i = 0; i < mentions.size(); ++i)
      if (mentions[i].id == id) return int(i);
    throw std::runtime_error("doc '" + doc_id + "': unknown mention id '" + id + "'");
  }

  size_t total_tokens() const {
    size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

struct Partition {
  std::vector<std::vector<std::string>> clusters;
};

inline void sort_mentions(CorpusDocument& doc) {
  std::sort(doc.mentions.begin(), doc.mentions.end(), mention_before);
}

// All structural checks; returns one message per violation, empty if valid.
inline std::vector<std::string> validate_document(const CorpusDocument& doc) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) {
    errors.push_back("doc '" + doc.doc_id + "': " + msg);
  };

  for (size_t si = 0; si < doc.sentences.size(); ++si) {
    for (size_t ti = 0; ti < doc.sentences[si].size(); ++ti) {
      const Token& tok = doc.sentences[si][ti];
      if (tok.empty())
        fail("sentence " + std::to_string(si) + " token " + std::to_string(ti) + " is empty");
      else if (tok.find_first_of(" \t\n\r") != std::string::npos)
        fail("sentence " + std::to_string(si) + " token '" + tok + "' contains whitespace");
    }
  }

  std::set<std::string> ids;
  for (const Mention& m : doc.mentions) {
    if (!ids.insert(m.id).second) fail("duplicate mention id '" + m.id + "'");
    if (m.sentence_index < 0 || size_t(m.sentence_index) >= doc.sentences.size()) {
      fail("mention '" + m.id + "': sentence index out of range");
      continue;
    }
    int len = int(doc.sentences[m.sentence_index].size());
    if (m.start_token < 0 || m.start_token > m.end_token || m.end_token >= len)
      fail("mention '" + m.id + "': token offset out of range");
    if (m.is_first_person && !m.is_pronoun)
      fail("mention '" + m.id + "': first_person set on a non-pronoun");
  }

  std::set<std::string> clustered;
  for (size_t ei = 0; ei < doc.entities.size(); ++ei) {
    const auto& entity = doc.entities[ei];
    if (entity.size() < 2)
      fail("entity " + std::to_string(ei) + " has fewer than 2 members");
    for (const std::string& id : entity) {
      if (!ids.count(id))
        fail("entity " + std::to_string(ei) + ": unknown mention id '" + id + "'");
      else if (!clustered.insert(id).second)
        fail("mention '" + id + "' appears in more than one entity");
    }
  }
  return errors;
}

namespace detail {

inline void expect_fields(const nlohmann::json& j, const std::set<std::string>& allowed,
                          const std::string& where) {
  if (!j.is_object()) throw std::runtime_error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::runtime_error(where + ": unknown field '" + it.key() + "'");
  }
  for (const std::string& key : allowed) {
    if (!j.contains(key))
      throw std::runtime_error(where + ": missing field '" + key + "'");
  }
}

}  // namespace detail

// Parses one document record. Throws on the first structural violation.
inline CorpusDocument parse_document_json(const nlohmann::json& j) {
  detail::expect_fields(j, {"doc_id", "sentences", "mentions", "entities"}, "document");
  CorpusDocument doc;
  if (!j["doc_id"].is_string()) throw std::runtime_error("document: doc_id must be a string");
  doc.doc_id = j["doc_id"].get<std::string>();
  const std::string where = "doc '" + doc.doc_id + "'";

  if (!j["sentences"].is_array()) throw std::runtime_error(where + ": sentences must be an array");
  for (const auto& sent : j["sentences"]) {
    if (!sent.is_array()) throw std::runtime_error(where + ": sentence must be an array");
    std::vector<Token> tokens;
    for (const auto& tok : sent) {
      if (!tok.is_string()) throw std::runtime_error(where + ": token must be a string");
      tokens.push_back(tok.get<std::string>());
    }
    doc.sentences.push_back(std::move(tokens));
  }

  if (!j["mentions"].is_array()) throw std::runtime_error(where + ": mentions must be an array");
  for (const auto& mj : j["mentions"]) {
    detail::expect_fields(
        mj, {"id", "sentence", "start", "end", "pronoun", "etype", "proper", "first_person"},
        where + " mention");
    Mention m;
    if (!mj["id"].is_string()) throw std::runtime_error(where + ": mention id must be a string");
    m.id = mj["id"].get<std::string>();
    const std::string mw = where + " mention '" + m.id + "'";
    for (const char* f : {"sentence", "start", "end"})
      if (!mj[f].is_number_integer())
        throw std::runtime_error(mw + ": field '" + std::string(f) + "' must be an integer");
    for (const char* f : {"pronoun", "proper", "first_person"})
      if (!mj[f].is_boolean())
        throw std::runtime_error(mw + ": field '" + std::string(f) + "' must be a boolean");
    if (!mj["etype"].is_string()) throw std::runtime_error(mw + ": etype must be a string");
    m.sentence_index = mj["sentence"].get<int>();
    m.start_token = mj["start"].get<int>();
    m.end_token = mj["end"].get<int>();
    m.is_pronoun = mj["pronoun"].get<bool>();
    m.entity_type = entity_type_from_string(mj["etype"].get<std::string>());
    m.is_proper_name = mj["proper"].get<bool>();
    m.is_first_person = mj["first_person"].get<bool>();
    doc.mentions.push_back(std::move(m));
  }

  if (!j["entities"].is_array()) throw std::runtime_error(where + ": entities must be an array");
  for (const auto& ej : j["entities"]) {
    if (!ej.is_array()) throw std::runtime_error(where + ": entity must be an array");
    std::vector<std::string> entity;
    for (const auto& idj : ej) {
      if (!idj.is_string()) throw std::runtime_error(where + ": entity member must be a string");
      entity.push_back(idj.get<std::string>());
    }
    doc.entities.push_back(std::move(entity));
  }

  sort_mentions(doc);
  std::vector<std::string> errors = validate_document(doc);
  if (!errors.empty()) throw std::runtime_error(errors.front());
  return doc;
}

// Parses a full corpus stream, throwing on the first invalid record.
inline std::vector<CorpusDocument> parse_corpus(std::istream& in) {
  std::vector<CorpusDocument> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": malformed record: " + e.what());
    }
    docs.push_back(parse_document_json(j));
  }
  return docs;
}

inline std::vector<CorpusDocument> parse_corpus(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

// Parses leniently, collecting every violation instead of stopping at the
// first. Valid documents still come back in `docs`.
inline std::vector<std::string> validate_corpus_stream(std::istream& in,
                                                       std::vector<CorpusDocument>* docs = nullptr) {
  std::vector<std::string> errors;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      errors.push_back("line " + std::to_string(lineno) + ": malformed record: " + e.what());
      continue;
    }
    try {
      CorpusDocument doc = parse_document_json(j);
      if (docs) docs->push_back(std::move(doc));
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return errors;
}

inline nlohmann::json document_to_json(const CorpusDocument& doc) {
  nlohmann::json j;
  j["doc_id"] = doc.doc_id;
  j["sentences"] = doc.sentences;
  j["mentions"] = nlohmann::json::array();
  for (const Mention& m : doc.mentions) {
    nlohmann::json mj;
    mj["id"] = m.id;
    mj["sentence"] = m.sentence_index;
    mj["start"] = m.start_token;
    mj["end"] = m.end_token;
    mj["pronoun"] = m.is_pronoun;
    mj["etype"] = to_string(m.entity_type);
    mj["proper"] = m.is_proper_name;
    mj["first_person"] = m.is_first_person;
    j["mentions"].push_back(std::move(mj));
  }
  j["entities"] = doc.entities;
  return j;
}

inline std::string serialize_document(const CorpusDocument& doc) {
  return document_to_json(doc).dump();
}

inline std::string serialize_corpus(const std::vector<CorpusDocument>& docs) {
  std::string out;
  for (const CorpusDocument& doc : docs) {
    out += serialize_document(doc);
    out += '\n';
  }
  return out;
}

// Mentions outside every gold entity.
inline std::set<std::string> gold_singletons(const CorpusDocument& doc) {
  std::set<std::string> clustered;
  for (const auto& entity : doc.entities)
    for (const std::string& id : entity) clustered.insert(id);
  std::set<std::string> singletons;
  for (const Mention& m : doc.mentions)
    if (!clustered.count(m.id)) singletons.insert(m.id);
  return singletons;
}

// Gold entities plus one 1-member cluster per gold singleton.
inline Partition gold_partition(const CorpusDocument& doc) {
  Partition p;
  std::set<std::string> clustered;
  for (const auto& entity : doc.entities) {
    p.clusters.push_back(entity);
    for (const std::string& id : entity) clustered.insert(id);
  }
  for (const Mention& m : doc.mentions)
    if (!clustered.count(m.id)) p.clusters.push_back({m.id});
  return p;
}

// Checks the Partition invariants against a document's mention set.
inline bool is_valid_partition(const CorpusDocument& doc, const Partition& p,
                               std::string* why = nullptr) {
  std::set<std::string> seen;
  for (const auto& cluster : p.clusters) {
    for (const std::string& id : cluster) {
      if (!seen.insert(id).second) {
        if (why) *why = "mention '" + id + "' in more than one cluster";
        return false;
      }
    }
  }
  std::set<std::string> all;
  for (const Mention& m : doc.mentions) all.insert(m.id);
  if (seen != all) {
    if (why) *why = "clusters do not cover the document's mention set exactly";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator.
//
// Small closed vocabulary; coreferent mentions either repeat a name token or
// are pronoun-name pairs at most 2 sentences apart, so lexical and distance
// features carry signal. Per document: 3-10 sentences, 2-6 entities of size
// 2-4, and 3-12 singleton mentions.
// ---------------------------------------------------------------------------

namespace synth {

inline const std::vector<std::string>& person_names() {
  static const std::vector<std::string> v = {"Budi", "Siti", "Andi", "Dewi", "Rina",
                                             "Joko", "Maya", "Tono", "Lina", "Agus"};
  return v;
}

inline const std::vector<std::vector<std::string>>& org_names() {
  static const std::vector<std::vector<std::string>> v = {
      {"Institut", "Teknologi", "Bandung"},
      {"Universitas", "Indonesia"},
      {"Bank", "Rakyat", "Indonesia"},
      {"Badan", "Bahasa"},
      {"Dewan", "Pers"},
      {"Kantor", "Berita", "Antara"}};
  return v;
}

inline const std::vector<std::string>& location_names() {
  static const std::vector<std::string> v = {"Jakarta", "Bandung", "Surabaya",
                                             "Medan", "Bogor", "Semarang"};
  return v;
}

inline const std::vector<std::string>& person_pronouns() {
  static const std::vector<std::string> v = {"dia", "ia"};
  return v;
}

inline const std::vector<std::vector<std::string>>& singleton_phrases() {
  static const std::vector<std::vector<std::string>> v = {
      {"pesan"},          {"buku", "itu"},    {"kantor", "baru"}, {"sebuah", "surat"},
      {"pasar"},          {"sepeda"},         {"rumah", "lama"},  {"meja"},
      {"kursi"},          {"jalan", "raya"},  {"kota"},           {"sekolah"},
      {"mobil", "baru"},  {"taman"},          {"toko"}};
  return v;
}

inline const std::vector<std::string>& first_person_pronouns() {
  static const std::vector<std::string> v = {"saya", "aku", "kami"};
  return v;
}

inline const std::vector<std::string>& fillers() {
  static const std::vector<std::string> v = {
      "kemarin", "mengirim", "pesan",  "kepada", "bekerja", "di",    "dan",
      "membaca", "pergi",    "ke",     "hari",   "ini",     "sangat", "sering",
      "menulis", "surat",    "untuk",  "bertemu", "dengan", "lalu",  "kemudian",
      "sedang",  "sudah",    "akan",   "masih"};
  return v;
}

}  // namespace synth

inline std::vector<CorpusDocument> generate_synthetic_corpus(uint64_t seed, int doc_count) {
  if (doc_count < 1) throw std::invalid_argument("doc_count must be >= 1");
  SplitMix64 rng(seed);
  std::vector<CorpusDocument> docs;

  for (int d = 0; d < doc_count; ++d) {
    CorpusDocument doc;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "doc%04d", d);
      doc.doc_id = buf;
    }
    const int num_sentences = rng.next_int(3, 10);
    const int num_entities = rng.next_int(2, 6);
    const int num_singletons = rng.next_int(3, 12);

    // Planned mention before token positions exist.
    struct Planned {
      std::vector<Token> tokens;
      int sentence = 0;
      int entity = -1;  // -1 = singleton
      bool pronoun = false, proper = false, first_person = false;
      EntityType etype = EntityType::OTHER;
      int start = 0, end = 0;  // filled while emitting tokens
    };
    std::vector<Planned> planned;

    // Names are drawn without replacement within a document so that a
    // repeated name always signals coreference.
    std::vector<std::string> persons = synth::person_names();
    std::vector<std::vector<std::string>> orgs = synth::org_names();
    std::vector<std::string> locations = synth::location_names();

    for (int e = 0; e < num_entities; ++e) {
      uint64_t kind = rng.next_below(10);
      std::vector<Token> name;
      EntityType etype;
      if (kind < 6 || (orgs.empty() && locations.empty())) {
        etype = EntityType::PERSON;
        size_t pick = rng.next_below(persons.size());
        name = {persons[pick]};
        persons.erase(persons.begin() + pick);
      } else if (kind < 8 && !orgs.empty()) {
        etype = EntityType::ORGANIZATION;
        size_t pick = rng.next_below(orgs.size());
        name = orgs[pick];
        orgs.erase(orgs.begin() + pick);
      } else {
        etype = EntityType::LOCATION;
        size_t pick = rng.next_below(locations.size());
        name = {locations[pick]};
        locations.erase(locations.begin() + pick);
      }

      const int size = rng.next_int(2, 4);
      int prev_sentence = rng.next_int(0, num_sentences - 1);
      bool prev_was_pronoun = false;
      for (int k = 0; k < size; ++k) {
        Planned p;
        p.entity = e;
        p.etype = etype;
        if (k == 0) {
          p.tokens = name;
          p.proper = true;
          p.sentence = prev_sentence;
        } else {
          p.sentence = std::min(num_sentences - 1, prev_sentence + int(rng.next_below(3)));
          // Pronouns only follow a name mention, keeping every pronoun
          // within 2 sentences of a name of its entity.
          bool use_pronoun = etype == EntityType::PERSON && !prev_was_pronoun &&
                             rng.next_below(100) < 45;
          if (use_pronoun) {
            p.tokens = {synth::person_pronouns()[rng.next_below(synth::person_pronouns().size())]};
            p.pronoun = true;
          } else {
            p.tokens = name;
            p.proper = true;
          }
          prev_sentence = p.sentence;
          prev_was_pronoun = p.pronoun;
        }
        planned.push_back(std::move(p));
      }
    }

    // Singletons: distinct common-noun phrases, occasionally a first-person
    // pronoun.
    std::vector<std::vector<std::string>> nouns = synth::singleton_phrases();
    std::vector<std::string> firsts = synth::first_person_pronouns();
    for (int s = 0; s < num_singletons; ++s) {
      Planned p;
      p.sentence = rng.next_int(0, num_sentences - 1);
      bool use_first = !firsts.empty() && (rng.next_below(100) < 15 || nouns.empty());
      if (use_first) {
        size_t pick = rng.next_below(firsts.size());
        p.tokens = {firsts[pick]};
        firsts.erase(firsts.begin() + pick);
        p.pronoun = true;
        p.first_person = true;
        p.etype = EntityType::PERSON;
      } else {
        size_t pick = rng.next_below(nouns.size());
        p.tokens = nouns[pick];
        nouns.erase(nouns.begin() + pick);
        p.etype = EntityType::OTHER;
      }
      planned.push_back(std::move(p));
    }

    // Emit token streams sentence by sentence.
    std::vector<std::vector<int>> by_sentence(num_sentences);
    for (size_t i = 0; i < planned.size(); ++i) by_sentence[planned[i].sentence].push_back(int(i));

    const auto& fill = synth::fillers();
    doc.sentences.resize(num_sentences);
    for (int s = 0; s < num_sentences; ++s) {
      std::vector<Token>& toks = doc.sentences[s];
      int opener = rng.next_int(1, 2);
      for (int i = 0; i < opener; ++i) toks.push_back(fill[rng.next_below(fill.size())]);
      for (size_t k = 0; k < by_sentence[s].size(); ++k) {
        if (k > 0) {
          int gap = rng.next_int(1, 3);
          for (int i = 0; i < gap; ++i) toks.push_back(fill[rng.next_below(fill.size())]);
        }
        Planned& p = planned[by_sentence[s][k]];
        p.start = int(toks.size());
        for (const Token& t : p.tokens) toks.push_back(t);
        p.end = int(toks.size()) - 1;
      }
      toks.push_back(fill[rng.next_below(fill.size())]);
      toks.push_back(".");
    }

    // Materialize mentions, sort into document order, then name them.
    std::vector<std::pair<Mention, int>> with_entity;
    for (const Planned& p : planned) {
      Mention m;
      m.sentence_index = p.sentence;
      m.start_token = p.start;
      m.end_token = p.end;
      m.is_pronoun = p.pronoun;
      m.entity_type = p.etype;
      m.is_proper_name = p.proper;
      m.is_first_person = p.first_person;
      with_entity.emplace_back(std::move(m), p.entity);
    }
    std::sort(with_entity.begin(), with_entity.end(),
              [](const auto& a, const auto& b) { return mention_before(a.first, b.first); });

    std::vector<std::vector<std::string>> members(num_entities);
    for (size_t i = 0; i < with_entity.size(); ++i) {
      with_entity[i].first.id = "m" + std::to_string(i);
      if (with_entity[i].second >= 0)
        members[with_entity[i].second].push_back(with_entity[i].first.id);
      doc.mentions.push_back(with_entity[i].first);
    }
    for (auto& entity : members) doc.entities.push_back(std::move(entity));

    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace coref
