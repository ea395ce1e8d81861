#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "signalmarket/errors.hpp"
#include "signalmarket/text/tokenize.hpp"

namespace signalmarket::text {

// Sparse term weights sorted by term index.
using WeightVector = std::vector<std::pair<int, double>>;

struct TfidfModel {
  std::vector<std::string> terms;  // lexicographic, index = position
  std::unordered_map<std::string, int> vocab;
  std::vector<int> doc_freq;
  std::vector<double> raw_idf;     // log(N / (1 + n_w)), may be negative
  std::vector<double> idf;         // raw_idf clamped at 0
  int n_docs = 0;

  int index_of(const std::string& term) const {
    auto it = vocab.find(term);
    return it == vocab.end() ? -1 : it->second;
  }
};

inline TfidfModel fit_tfidf(const std::vector<const Document*>& corpus) {
  if (corpus.empty()) throw_input("cannot fit TF-IDF on an empty corpus");
  std::map<std::string, int> df;
  std::vector<std::string> uniq;
  for (const Document* d : corpus) {
    uniq = d->tokens;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  TfidfModel m;
  m.n_docs = static_cast<int>(corpus.size());
  const double N = m.n_docs;
  for (auto& [term, n] : df) {
    m.vocab.emplace(term, static_cast<int>(m.terms.size()));
    m.terms.push_back(term);
    m.doc_freq.push_back(n);
    const double raw = std::log(N / (1.0 + n));
    m.raw_idf.push_back(raw);
    m.idf.push_back(std::max(0.0, raw));
  }
  return m;
}

inline TfidfModel fit_tfidf(const std::vector<Document>& corpus) {
  std::vector<const Document*> ptrs;
  ptrs.reserve(corpus.size());
  for (const auto& d : corpus) ptrs.push_back(&d);
  return fit_tfidf(ptrs);
}

// Raw counts of in-vocabulary terms, by term index.
inline std::vector<std::pair<int, int>> term_counts(const TfidfModel& model, const Document& doc) {
  std::vector<int> idx;
  idx.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    const int i = model.index_of(t);
    if (i >= 0) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<std::pair<int, int>> out;
  for (int i : idx) {
    if (!out.empty() && out.back().first == i) {
      ++out.back().second;
    } else {
      out.emplace_back(i, 1);
    }
  }
  return out;
}

// TF (raw count) times IDF. Terms with zero IDF are kept with weight 0.
inline WeightVector vectorize(const TfidfModel& model, const Document& doc) {
  WeightVector v;
  for (auto [i, n] : term_counts(model, doc)) v.emplace_back(i, n * model.idf[i]);
  return v;
}

inline double norm(const WeightVector& v) {
  double s = 0.0;
  for (auto& [i, w] : v) s += w * w;
  return std::sqrt(s);
}

// 0 when either vector has zero norm.
inline double cosine_similarity(const WeightVector& a, const WeightVector& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (a[i].first > b[j].first) {
      ++j;
    } else {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

// Same support and proportional counts: the weight vectors are parallel under
// any IDF, so the similarity is 1 even if every weight was clamped to 0.
inline bool proportional_counts(const std::vector<std::pair<int, int>>& a, const std::vector<std::pair<int, int>>& b) {
  if (a.empty() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first) return false;
    if (static_cast<long long>(a[i].second) * b[0].second != static_cast<long long>(b[i].second) * a[0].second) {
      return false;
    }
  }
  return true;
}

inline double tailoring_score(const TfidfModel& model, const Document& job, const Document& letter) {
  if (proportional_counts(term_counts(model, job), term_counts(model, letter))) return 1.0;
  return cosine_similarity(vectorize(model, job), vectorize(model, letter));
}

inline double tailoring_score(const TfidfModel& model, const std::string& job_text, const std::string& letter_text,
                              const StopwordSet& stopwords) {
  return tailoring_score(model, preprocess(job_text, stopwords), preprocess(letter_text, stopwords));
}

}  // namespace signalmarket::text
