#pragma once
// Coreference evaluation: MUC, B-cubed, CEAF_e with optimal one-to-one
// cluster alignment (Kuhn-Munkres), and the CoNLL average F1. Corpus-level
// scores micro-aggregate numerators and denominators across documents.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coref/corpus.hpp"

namespace coref {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF make_prf(double num_p, double den_p, double num_r, double den_r) {
  PRF x;
  x.precision = den_p > 0 ? num_p / den_p : 0.0;
  x.recall = den_r > 0 ? num_r / den_r : 0.0;
  x.f1 = (x.precision + x.recall) > 0
             ? 2.0 * x.precision * x.recall / (x.precision + x.recall)
             : 0.0;
  return x;
}

struct ScoreReport {
  PRF muc;
  PRF b_cubed;
  PRF ceaf_e;
  double conll_avg_f1 = 0.0;
};

inline double conll_avg(double muc_f1, double b_cubed_f1, double ceaf_e_f1) {
  return (muc_f1 + b_cubed_f1 + ceaf_e_f1) / 3.0;
}

// ---------------------------------------------------------------------------
// Optimal assignment.
// ---------------------------------------------------------------------------

struct Assignment {
  std::vector<int> col_of_row;  // -1 = row unassigned (only when rows > cols)
  double total = 0.0;
};

namespace detail {

// O(n^3) Kuhn-Munkres on the maximization form; requires rows <= cols.
// Returns the maximal total only.
inline double assignment_max_total(const std::vector<std::vector<double>>& score) {
  int n = int(score.size());
  if (n == 0) return 0.0;
  int m = int(score[0].size());
  if (m == 0) return 0.0;

  // Transpose when there are more rows than columns.
  if (n > m) {
    std::vector<std::vector<double>> t(m, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) t[j][i] = score[i][j];
    return assignment_max_total(t);
  }

  const double kInf = std::numeric_limits<double>::infinity();
  // Minimize negated scores with the potentials method (1-indexed).
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = -score[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) total += score[p[j] - 1][j - 1];
  return total;
}

inline std::vector<std::vector<double>> submatrix(const std::vector<std::vector<double>>& score,
                                                  int from_row, const std::vector<int>& cols) {
  std::vector<std::vector<double>> sub;
  for (size_t i = size_t(from_row); i < score.size(); ++i) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (int c : cols) row.push_back(score[i][c]);
    sub.push_back(std::move(row));
  }
  return sub;
}

}  // namespace detail

// Injective row->column map of size min(rows, cols) with maximal total.
// Among maximal assignments, returns the lexicographically smallest sequence
// (col of row 0, col of row 1, ...), with "unassigned" ordered after every
// real column.
inline Assignment hungarian(const std::vector<std::vector<double>>& score) {
  Assignment out;
  const int n = int(score.size());
  const int m = n > 0 ? int(score[0].size()) : 0;
  out.col_of_row.assign(size_t(n), -1);
  if (n == 0 || m == 0) return out;
  for (const auto& row : score)
    if (int(row.size()) != m) throw std::invalid_argument("hungarian: ragged score matrix");

  const double target = detail::assignment_max_total(score);
  const double tol = 1e-9 * std::max(1.0, std::fabs(target));

  std::vector<int> avail(m);
  for (int j = 0; j < m; ++j) avail[j] = j;
  double fixed = 0.0;
  int remaining_assignments = std::min(n, m);

  for (int r = 0; r < n && remaining_assignments > 0; ++r) {
    const int rows_after = n - r - 1;
    bool placed = false;
    for (size_t k = 0; k < avail.size(); ++k) {
      const int c = avail[k];
      std::vector<int> rest = avail;
      rest.erase(rest.begin() + k);
      const double sub = detail::assignment_max_total(detail::submatrix(score, r + 1, rest));
      if (std::fabs(fixed + score[r][c] + sub - target) <= tol) {
        out.col_of_row[r] = c;
        fixed += score[r][c];
        avail = std::move(rest);
        --remaining_assignments;
        placed = true;
        break;
      }
    }
    if (!placed) {
      // Row stays unassigned; feasible only when enough rows remain.
      if (rows_after < remaining_assignments)
        throw std::logic_error("hungarian: refinement failed to reach the optimum");
    }
  }
  out.total = fixed;
  return out;
}

// ---------------------------------------------------------------------------
// Per-document tallies, micro-aggregated across documents.
// ---------------------------------------------------------------------------

struct MetricTallies {
  // MUC
  double muc_recall_num = 0, muc_recall_den = 0;
  double muc_precision_num = 0, muc_precision_den = 0;
  // B-cubed
  double b3_recall_num = 0, b3_precision_num = 0;
  double b3_den = 0;  // mention count (same for both sides)
  // CEAF_e
  double ceafe_phi = 0;
  double ceafe_key_clusters = 0, ceafe_response_clusters = 0;

  void add(const MetricTallies& o) {
    muc_recall_num += o.muc_recall_num;
    muc_recall_den += o.muc_recall_den;
    muc_precision_num += o.muc_precision_num;
    muc_precision_den += o.muc_precision_den;
    b3_recall_num += o.b3_recall_num;
    b3_precision_num += o.b3_precision_num;
    b3_den += o.b3_den;
    ceafe_phi += o.ceafe_phi;
    ceafe_key_clusters += o.ceafe_key_clusters;
    ceafe_response_clusters += o.ceafe_response_clusters;
  }

  ScoreReport report() const {
    ScoreReport r;
    r.muc = make_prf(muc_precision_num, muc_precision_den, muc_recall_num, muc_recall_den);
    r.b_cubed = make_prf(b3_precision_num, b3_den, b3_recall_num, b3_den);
    r.ceaf_e = make_prf(ceafe_phi, ceafe_response_clusters, ceafe_phi, ceafe_key_clusters);
    r.conll_avg_f1 = conll_avg(r.muc.f1, r.b_cubed.f1, r.ceaf_e.f1);
    return r;
  }
};

namespace detail {

// mention id -> cluster index; rejects duplicate memberships.
inline std::map<std::string, int> cluster_index(const Partition& p, const char* side) {
  std::map<std::string, int> idx;
  for (size_t c = 0; c < p.clusters.size(); ++c) {
    for (const std::string& id : p.clusters[c]) {
      if (!idx.emplace(id, int(c)).second)
        throw std::runtime_error(std::string(side) + " partition lists mention '" + id +
                                 "' more than once");
    }
  }
  return idx;
}

inline void require_same_mentions(const std::map<std::string, int>& key,
                                  const std::map<std::string, int>& response) {
  if (key.size() == response.size()) {
    bool same = true;
    auto a = key.begin();
    auto b = response.begin();
    for (; a != key.end(); ++a, ++b) {
      if (a->first != b->first) {
        same = false;
        break;
      }
    }
    if (same) return;
  }
  throw std::runtime_error("key and response partitions cover different mention sets");
}

inline MetricTallies document_tallies(const Partition& key, const Partition& response) {
  const auto key_of = cluster_index(key, "key");
  const auto resp_of = cluster_index(response, "response");
  require_same_mentions(key_of, resp_of);

  MetricTallies t;

  // MUC: recall from key clusters split by the response, precision mirrored.
  auto muc_side = [](const Partition& a, const std::map<std::string, int>& other,
                     double& num, double& den) {
    for (const auto& cluster : a.clusters) {
      std::set<int> parts;
      for (const std::string& id : cluster) parts.insert(other.at(id));
      num += double(cluster.size()) - double(parts.size());
      den += double(cluster.size()) - 1.0;
    }
  };
  muc_side(key, resp_of, t.muc_recall_num, t.muc_recall_den);
  muc_side(response, key_of, t.muc_precision_num, t.muc_precision_den);

  // B-cubed: per-mention cluster overlap.
  std::map<std::pair<int, int>, int> overlap;
  for (const auto& [id, kc] : key_of) overlap[{kc, resp_of.at(id)}]++;
  for (const auto& [id, kc] : key_of) {
    const int rc = resp_of.at(id);
    const double inter = overlap[{kc, rc}];
    t.b3_recall_num += inter / double(key.clusters[kc].size());
    t.b3_precision_num += inter / double(response.clusters[rc].size());
  }
  t.b3_den = double(key_of.size());

  // CEAF_e: optimal alignment under phi4 = 2|K&R| / (|K|+|R|).
  if (!key.clusters.empty() && !response.clusters.empty()) {
    std::vector<std::vector<double>> phi(key.clusters.size(),
                                         std::vector<double>(response.clusters.size(), 0.0));
    for (const auto& [kr, inter] : overlap) {
      phi[kr.first][kr.second] = 2.0 * inter /
                                 (double(key.clusters[kr.first].size()) +
                                  double(response.clusters[kr.second].size()));
    }
    t.ceafe_phi = detail::assignment_max_total(phi);
  }
  t.ceafe_key_clusters = double(key.clusters.size());
  t.ceafe_response_clusters = double(response.clusters.size());
  return t;
}

}  // namespace detail

inline PRF muc(const Partition& key, const Partition& response) {
  const MetricTallies t = detail::document_tallies(key, response);
  return make_prf(t.muc_precision_num, t.muc_precision_den, t.muc_recall_num, t.muc_recall_den);
}

inline PRF b_cubed(const Partition& key, const Partition& response) {
  const MetricTallies t = detail::document_tallies(key, response);
  return make_prf(t.b3_precision_num, t.b3_den, t.b3_recall_num, t.b3_den);
}

inline PRF ceaf_e(const Partition& key, const Partition& response) {
  const MetricTallies t = detail::document_tallies(key, response);
  return make_prf(t.ceafe_phi, t.ceafe_response_clusters, t.ceafe_phi, t.ceafe_key_clusters);
}

inline ScoreReport score_document(const Partition& key, const Partition& response) {
  return detail::document_tallies(key, response).report();
}

// Adds a 1-member cluster to each side for every mention the other side has
// but it lacks, so the two partitions cover the same mention set.
inline void complete_partitions(Partition& key, Partition& response) {
  std::set<std::string> in_key, in_response;
  for (const auto& c : key.clusters) in_key.insert(c.begin(), c.end());
  for (const auto& c : response.clusters) in_response.insert(c.begin(), c.end());
  for (const std::string& id : in_key)
    if (!in_response.count(id)) response.clusters.push_back({id});
  for (const std::string& id : in_response)
    if (!in_key.count(id)) key.clusters.push_back({id});
}

// Corpus-level scoring of response partitions against gold documents.
// Every document must appear on both sides.
inline ScoreReport score_system(const std::vector<CorpusDocument>& key_docs,
                                const std::map<std::string, Partition>& responses) {
  std::set<std::string> key_ids;
  for (const CorpusDocument& doc : key_docs) {
    if (!key_ids.insert(doc.doc_id).second)
      throw std::runtime_error("duplicate document id '" + doc.doc_id + "' in key");
  }
  std::string missing;
  for (const CorpusDocument& doc : key_docs)
    if (!responses.count(doc.doc_id)) missing += (missing.empty() ? "" : ", ") + doc.doc_id;
  if (!missing.empty())
    throw std::runtime_error("documents missing from response: " + missing);
  for (const auto& [id, part] : responses) {
    (void)part;
    if (!key_ids.count(id)) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty())
    throw std::runtime_error("documents missing from key: " + missing);

  MetricTallies total;
  for (const CorpusDocument& doc : key_docs) {
    Partition key = gold_partition(doc);
    Partition response = responses.at(doc.doc_id);
    complete_partitions(key, response);
    total.add(detail::document_tallies(key, response));
  }
  return total.report();
}

// ---------------------------------------------------------------------------
// Reporting: values x100 with 2 decimals, fixed row order.
// ---------------------------------------------------------------------------

inline double percent(double v) { return std::round(v * 10000.0) / 100.0; }

inline std::string format_report(const ScoreReport& r) {
  char buf[128];
  std::string out;
  out += "Metric              Precision     Recall         F1\n";
  auto row = [&](const char* name, const PRF& x) {
    std::snprintf(buf, sizeof(buf), "%-18s %10.2f %10.2f %10.2f\n", name, percent(x.precision),
                  percent(x.recall), percent(x.f1));
    out += buf;
  };
  row("MUC", r.muc);
  row("B3", r.b_cubed);
  row("CEAF_e", r.ceaf_e);
  std::snprintf(buf, sizeof(buf), "%-18s %32.2f\n", "CoNLL Average F1", percent(r.conll_avg_f1));
  out += buf;
  return out;
}

inline nlohmann::json report_to_json(const ScoreReport& r) {
  auto prf = [](const PRF& x) {
    return nlohmann::json{{"precision", percent(x.precision)},
                          {"recall", percent(x.recall)},
                          {"f1", percent(x.f1)}};
  };
  return nlohmann::json{{"muc", prf(r.muc)},
                        {"b_cubed", prf(r.b_cubed)},
                        {"ceaf_e", prf(r.ceaf_e)},
                        {"conll_avg_f1", percent(r.conll_avg_f1)}};
}

}  // namespace coref
