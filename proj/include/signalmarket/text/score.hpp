#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "signalmarket/csv.hpp"
#include "signalmarket/parallel.hpp"
#include "signalmarket/text/tfidf.hpp"

namespace signalmarket::text {

enum class ModelScope { global, per_skill };

inline ModelScope parse_model_scope(const std::string& s) {
  if (s == "global") return ModelScope::global;
  if (s == "per_skill" || s == "per-skill") return ModelScope::per_skill;
  throw_input("unknown model scope '", s, "' (expected global or per_skill)");
}

struct JobRecord {
  std::string doc_id;
  std::string text;
  std::string skill;
};

struct LetterRecord {
  std::string bid_id;
  std::string job_id;
  std::string text;
};

struct ScoredRow {
  std::string bid_id;
  std::string job_id;
  double tailoring = 0.0;
};

struct ScoreError {
  std::string bid_id;
  std::string job_id;
  std::string message;
};

struct ScoreResult {
  std::vector<ScoredRow> rows;
  std::vector<ScoreError> errors;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// Lines without the trailing CR; blank lines dropped. Calls fn(fields, line_no).
template <typename Fn>
void for_each_tsv_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    fn(split_tabs(line), no);
  }
}

}  // namespace detail

// doc_id <TAB> text [<TAB> skill]
inline std::vector<JobRecord> read_jobs_tsv(std::istream& in, const std::string& name = "jobs") {
  std::vector<JobRecord> out;
  detail::for_each_tsv_line(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() < 2 || f.size() > 3) {
      throw_input(name, " line ", no, ": expected doc_id<TAB>text[<TAB>skill], got ", f.size(), " fields");
    }
    if (f[0].empty()) throw_input(name, " line ", no, ": empty doc_id");
    out.push_back({f[0], f[1], f.size() == 3 ? f[2] : std::string()});
  });
  return out;
}

// bid_id <TAB> job_id <TAB> text
inline std::vector<LetterRecord> read_letters_tsv(std::istream& in, const std::string& name = "letters") {
  std::vector<LetterRecord> out;
  detail::for_each_tsv_line(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() != 3) {
      throw_input(name, " line ", no, ": expected bid_id<TAB>job_id<TAB>text, got ", f.size(), " fields");
    }
    out.push_back({f[0], f[1], f[2]});
  });
  return out;
}

// Fits TF-IDF on the job posts plus the letters that reference them (one
// model overall, or one per skill) and scores every letter against its job.
// Letters naming an unknown job become error records.
inline ScoreResult score_dataset(const std::vector<JobRecord>& jobs, const std::vector<LetterRecord>& letters,
                                 ModelScope scope, const StopwordSet& stopwords = default_stopwords(),
                                 unsigned threads = 1) {
  std::unordered_map<std::string, std::size_t> job_index;
  std::vector<Document> job_docs;
  job_docs.reserve(jobs.size());
  for (const auto& j : jobs) {
    if (!job_index.emplace(j.doc_id, job_docs.size()).second) throw_input("duplicate job doc_id '", j.doc_id, "'");
    job_docs.push_back(preprocess(j.doc_id, j.text, stopwords));
  }

  ScoreResult result;
  std::vector<Document> letter_docs;
  std::vector<std::size_t> letter_job;
  std::vector<const LetterRecord*> resolved;
  for (const auto& l : letters) {
    auto it = job_index.find(l.job_id);
    if (it == job_index.end()) {
      result.errors.push_back({l.bid_id, l.job_id, "unknown job_id '" + l.job_id + "'"});
      continue;
    }
    letter_docs.push_back(preprocess(l.bid_id, l.text, stopwords));
    letter_job.push_back(it->second);
    resolved.push_back(&l);
  }

  // Corpus key per document: "" for the global model, the job's skill otherwise.
  auto key_of_job = [&](std::size_t j) { return scope == ModelScope::global ? std::string() : jobs[j].skill; };
  std::map<std::string, std::vector<const Document*>> corpora;
  for (std::size_t j = 0; j < job_docs.size(); ++j) corpora[key_of_job(j)].push_back(&job_docs[j]);
  for (std::size_t i = 0; i < letter_docs.size(); ++i) corpora[key_of_job(letter_job[i])].push_back(&letter_docs[i]);
  std::map<std::string, TfidfModel> models;
  for (const auto& [key, docs] : corpora) models.emplace(key, fit_tfidf(docs));

  std::vector<double> scores(letter_docs.size());
  parallel_for(letter_docs.size(), resolve_threads(threads), [&](std::size_t i) {
    const TfidfModel& m = models.at(key_of_job(letter_job[i]));
    scores[i] = tailoring_score(m, job_docs[letter_job[i]], letter_docs[i]);
  });
  result.rows.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    result.rows.push_back({resolved[i]->bid_id, resolved[i]->job_id, scores[i]});
  }
  return result;
}

inline void write_scores_csv(std::ostream& os, const std::vector<ScoredRow>& rows) {
  os << "bid_id,job_id,tailoring\n";
  for (const auto& r : rows) {
    os << csv::quote(r.bid_id) << ',' << csv::quote(r.job_id) << ',' << csv::format_g10(r.tailoring) << '\n';
  }
}

inline void write_score_errors_csv(std::ostream& os, const std::vector<ScoreError>& errors) {
  os << "bid_id,job_id,error\n";
  for (const auto& e : errors) {
    os << csv::quote(e.bid_id) << ',' << csv::quote(e.job_id) << ',' << csv::quote(e.message) << '\n';
  }
}

}  // namespace signalmarket::text
