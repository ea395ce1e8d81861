#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "signalmarket/random.hpp"
#include "signalmarket/text/score.hpp"

using namespace signalmarket;
using namespace signalmarket::text;

namespace {

using Tokens = std::vector<std::string>;

TfidfModel fit_tokens(const std::vector<Tokens>& docs) {
  std::vector<Document> corpus;
  for (const auto& t : docs) corpus.push_back(Document{"", "", t});
  return fit_tfidf(corpus);
}

// Dense reference: count every term of both documents by hand, weight with
// the clamped idf and take the cosine.
double reference_score(const std::vector<Tokens>& corpus, const Tokens& a, const Tokens& b) {
  std::map<std::string, int> df;
  for (const auto& doc : corpus) {
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) df[t] += 1;
  }
  const double N = static_cast<double>(corpus.size());
  std::map<std::string, double> ca, cb;
  for (const auto& t : a) ca[t] += 1;
  for (const auto& t : b) cb[t] += 1;
  if (!ca.empty() && ca.size() == cb.size()) {
    bool same = true;
    double ratio = -1;
    for (const auto& [t, n] : ca) {
      auto it = cb.find(t);
      if (it == cb.end()) {
        same = false;
        break;
      }
      if (ratio < 0) ratio = it->second / n;
      if (it->second != ratio * n) same = false;
    }
    if (same) return 1.0;
  }
  long double dot = 0, na = 0, nb = 0;
  for (const auto& [t, n] : df) {
    const double idf = std::max(0.0, std::log(N / (1.0 + n)));
    const long double wa = (ca.count(t) ? ca[t] : 0.0) * idf;
    const long double wb = (cb.count(t) ? cb[t] : 0.0) * idf;
    dot += wa * wb;
    na += wa * wa;
    nb += wb * wb;
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(static_cast<double>(dot / std::sqrt(na * nb)), 0.0, 1.0);
}

}  // namespace

TEST(Preprocess, Examples) {
  StopwordSet stop = {"the"};
  EXPECT_TRUE(preprocess("The THE the", stop).tokens.empty());
  EXPECT_EQ(preprocess("WordPress website, website!", stop).tokens, (Tokens{"wordpress", "website", "website"}));
  EXPECT_EQ(preprocess("Café ÉCOLE naïve", stop).tokens, (Tokens{"café", "école", "naïve"}));
  EXPECT_EQ(preprocess("a b 42 x9", stop).tokens, (Tokens{"42", "x9"}));
  EXPECT_EQ(preprocess("rock\xF0\x9F\x8E\xB8roll", stop).tokens, (Tokens{"rock", "roll"}));
  EXPECT_EQ(preprocess("bad\xFFutf", stop).tokens, (Tokens{"bad", "utf"}));
}

TEST(Preprocess, NoStopwordsOrEmptyTokens) {
  const auto& stop = default_stopwords();
  const auto d = preprocess("I am writing to you because I have the skills you need, and I can start now.");
  EXPECT_FALSE(d.tokens.empty());
  for (const auto& t : d.tokens) {
    EXPECT_FALSE(t.empty());
    EXPECT_EQ(stop.count(t), 0u) << t;
  }
}

TEST(Tfidf, IdfExamples) {
  const auto m3 = fit_tokens({{"x", "y"}, {"x"}, {"z"}});
  EXPECT_EQ(m3.n_docs, 3);
  EXPECT_EQ(m3.doc_freq[m3.index_of("x")], 2);
  EXPECT_EQ(m3.idf[m3.index_of("x")], 0.0);
  const auto m4 = fit_tokens({{"x"}, {"y"}, {"y"}, {"z"}});
  EXPECT_NEAR(m4.idf[m4.index_of("x")], std::log(2.0), 1e-15);
  EXPECT_NEAR(m4.idf[m4.index_of("x")], 0.6931, 1e-4);
  const auto m2 = fit_tokens({{"w"}, {"w"}});
  EXPECT_NEAR(m2.raw_idf[0], std::log(2.0 / 3.0), 1e-15);
  EXPECT_LT(m2.raw_idf[0], 0.0);
  EXPECT_EQ(m2.idf[0], 0.0);
  EXPECT_THROW(fit_tokens({}), InputError);
}

TEST(Tfidf, VocabularyIsSortedAndIdfFollowsFormula) {
  const auto m = fit_tokens({{"b", "a", "b"}, {"c"}, {"a", "d"}, {}});
  EXPECT_TRUE(std::is_sorted(m.terms.begin(), m.terms.end()));
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    EXPECT_GE(m.doc_freq[i], 0);
    EXPECT_LE(m.doc_freq[i], m.n_docs);
    EXPECT_EQ(m.raw_idf[i], std::log(static_cast<double>(m.n_docs) / (1.0 + m.doc_freq[i])));
  }
}

TEST(Vectorize, Examples) {
  const auto m = fit_tokens({{"x"}, {"y"}, {"y"}, {"z"}});
  EXPECT_TRUE(vectorize(m, Document{}).empty());
  TfidfModel half = m;
  half.idf[half.index_of("x")] = 0.5;
  const auto v = vectorize(half, Document{"", "", {"x", "x", "unknown"}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].second, 1.0);
}

TEST(Vectorize, MatchesRecount) {
  Rng rng = substream(8, "test_recount");
  std::uniform_int_distribution<int> word(0, 30), len(0, 25);
  std::vector<Tokens> docs(40);
  for (auto& d : docs) {
    const int n = len(rng);
    for (int i = 0; i < n; ++i) d.push_back("w" + std::to_string(word(rng)));
  }
  const auto m = fit_tokens(docs);
  for (const auto& d : docs) {
    const auto v = vectorize(m, Document{"", "", d});
    std::map<int, double> expect;
    for (const auto& t : d) expect[m.index_of(t)] += 1.0;
    ASSERT_EQ(v.size(), expect.size());
    for (const auto& [i, w] : v) EXPECT_EQ(w, expect[i] * m.idf[i]);
  }
}

TEST(Cosine, Examples) {
  const WeightVector a = {{0, 1.0}, {1, 1.0}}, b = {{0, 1.0}, {2, 1.0}};
  EXPECT_NEAR(cosine_similarity(a, b), 0.5, 1e-15);
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(a, {{2, 3.0}}), 0.0);
  EXPECT_EQ(cosine_similarity(a, {}), 0.0);
  EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
}

TEST(Score, IdenticalAndDisjoint) {
  const std::string job = "Build a WordPress website for a small bakery with online ordering";
  const std::string other = "Translate legal contracts from German into English";
  std::vector<Document> corpus = {preprocess(job), preprocess(other), preprocess("Bakery branding and logo design")};
  const auto m = fit_tfidf(corpus);
  EXPECT_EQ(tailoring_score(m, job, job, default_stopwords()), 1.0);
  EXPECT_EQ(tailoring_score(m, job, other, default_stopwords()), 0.0);
}

TEST(Score, Invariances) {
  const std::string job = "Need a data analyst to clean sales data and build Excel dashboards for weekly reporting";
  const std::string letter = "I clean messy sales data every week and build dashboards in Excel and Tableau";
  std::vector<Document> corpus = {preprocess(job), preprocess(letter), preprocess("Logo design for a bakery"),
                                  preprocess("Write blog posts about travel in Portugal")};
  const auto m = fit_tfidf(corpus);
  const auto& stop = default_stopwords();
  const double base = tailoring_score(m, job, letter, stop);
  EXPECT_GT(base, 0.0);
  EXPECT_LT(base, 1.0);
  EXPECT_NEAR(tailoring_score(m, letter, job, stop), base, 1e-15);
  EXPECT_NEAR(tailoring_score(m, job, letter + " " + letter, stop), base, 1e-14);
  EXPECT_NEAR(tailoring_score(m, job, letter + " And I am the one you were looking for.", stop), base, 1e-15);

  auto shuffled = preprocess(letter);
  Rng rng = substream(2, "test_shuffle");
  std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
  EXPECT_NEAR(tailoring_score(m, preprocess(job), shuffled), base, 1e-15);
}

TEST(ScoreDataset, EdgeCases) {
  const std::vector<JobRecord> jobs = {{"j1", "Design a logo for a coffee roastery", ""}};
  EXPECT_TRUE(score_dataset(jobs, {}, ModelScope::global).rows.empty());

  const std::vector<LetterRecord> own = {{"b1", "j1", "Design a logo for a coffee roastery"}};
  const auto r = score_dataset(jobs, own, ModelScope::global);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].tailoring, 1.0);

  const std::vector<LetterRecord> mixed = {{"b1", "j9", "hello there"}, {"b2", "j1", "coffee logos are my thing"}};
  const auto e = score_dataset(jobs, mixed, ModelScope::global);
  ASSERT_EQ(e.errors.size(), 1u);
  EXPECT_EQ(e.errors[0].bid_id, "b1");
  EXPECT_NE(e.errors[0].message.find("j9"), std::string::npos);
  ASSERT_EQ(e.rows.size(), 1u);
  EXPECT_EQ(e.rows[0].bid_id, "b2");

  const std::vector<JobRecord> dup = {jobs[0], jobs[0]};
  EXPECT_THROW(score_dataset(dup, own, ModelScope::global), InputError);
}

TEST(ScoreDataset, MatchesReferenceOnSyntheticCorpus) {
  Rng rng = substream(4, "test_corpus");
  const std::vector<std::string> words = {"python", "scrape", "website", "logo", "design", "data", "excel",
                                          "report", "translate", "german", "video", "edit", "seo", "blog",
                                          "shopify", "store", "mobile", "app", "react", "api", "the", "and"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  auto random_text = [&] {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s += words[pick(rng)] + (i % 7 == 6 ? ". " : " ");
    return s;
  };
  std::vector<JobRecord> jobs;
  for (int j = 0; j < 20; ++j) jobs.push_back({"job" + std::to_string(j), random_text(), ""});
  std::vector<LetterRecord> letters;
  for (int i = 0; i < 80; ++i) letters.push_back({"bid" + std::to_string(i), jobs[i % 20].doc_id, random_text()});
  letters[5].text = jobs[5].text;

  const auto got = score_dataset(jobs, letters, ModelScope::global, default_stopwords(), 3);
  ASSERT_EQ(got.rows.size(), 80u);
  std::vector<Tokens> corpus;
  for (const auto& j : jobs) corpus.push_back(preprocess(j.text).tokens);
  for (const auto& l : letters) corpus.push_back(preprocess(l.text).tokens);
  for (std::size_t i = 0; i < letters.size(); ++i) {
    const double expect = reference_score(corpus, corpus[i % 20], corpus[20 + i]);
    EXPECT_NEAR(got.rows[i].tailoring, expect, 1e-12) << letters[i].bid_id;
    EXPECT_GE(got.rows[i].tailoring, 0.0);
    EXPECT_LE(got.rows[i].tailoring, 1.0);
  }
  EXPECT_EQ(got.rows[5].tailoring, 1.0);

  const auto again = score_dataset(jobs, letters, ModelScope::global, default_stopwords(), 1);
  for (std::size_t i = 0; i < letters.size(); ++i) EXPECT_EQ(got.rows[i].tailoring, again.rows[i].tailoring);
}

TEST(ScoreDataset, PerSkillModelsUseSeparateCorpora) {
  const std::vector<JobRecord> jobs = {{"a", "python scraper for product prices", "dev"},
                                       {"b", "python tutor for beginners", "teach"}};
  const std::vector<LetterRecord> letters = {{"1", "a", "python scraper expert"}, {"2", "b", "patient python tutor"}};
  const auto g = score_dataset(jobs, letters, ModelScope::global);
  const auto s = score_dataset(jobs, letters, ModelScope::per_skill);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_NE(g.rows[0].tailoring, s.rows[0].tailoring);
}

TEST(Tsv, ReadersAndWriters) {
  std::istringstream jobs_in("j1\tSome text\n\nj2\tOther text\n");
  const auto jobs = read_jobs_tsv(jobs_in);
  ASSERT_EQ(jobs.size(), 2u);
  EXPECT_EQ(jobs[1].text, "Other text");
  std::istringstream bad("only-one-field\n");
  EXPECT_THROW(read_letters_tsv(bad), InputError);

  std::ostringstream os;
  write_scores_csv(os, {{"b,1", "j1", 0.123456789012345}});
  EXPECT_EQ(os.str(), "bid_id,job_id,tailoring\n\"b,1\",j1,0.123456789\n");
}
