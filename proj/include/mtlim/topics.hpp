#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mtlim/diffusion_data.hpp"

namespace mtlim {

// One raw post: author, "YYYY-MM-DD HH:MM:SS" timestamp, free text.
struct RawDocument {
  std::string user;
  std::string timestamp;
  std::string text;
};

// Cleaned corpus.  Users and vocabulary are numbered in order of first
// appearance; documents that end up with no surviving tokens are dropped
// and counted.
struct Corpus {
  struct Doc {
    int user = 0;               // index into users
    std::string timestamp;      // raw, parsed later by build_log
    std::vector<int> terms;     // vocabulary indices, repeats preserved
  };
  std::vector<std::string> users;
  std::vector<std::string> vocabulary;
  std::vector<Doc> documents;
  long dropped_documents = 0;
};

// Lowercases, removes URL tokens (scheme://...), @-mentions and
// non-alphanumeric characters, drops stopwords and tokens shorter than two
// characters, then drops terms appearing in fewer than three documents.
Corpus preprocess(const std::vector<RawDocument>& raw,
                  const std::vector<std::string>& stopwords);

// The library's built-in English stopword list.
const std::vector<std::string>& default_stopwords();

// D x V matrix with X(d, v) = count * (1 + ln(D / (1 + df_v))).
Eigen::MatrixXd tfidf(const Corpus& corpus);

struct TopicModel {
  Eigen::MatrixXd w;  // D x K document loadings
  Eigen::MatrixXd h;  // K x V topic-term weights
  std::vector<double> objective_trace;  // ||X - WH||_F^2 per update pair
  bool converged = false;
  int iterations = 0;
};

// Multiplicative-update NMF on the Frobenius objective.  H is refreshed
// before W in every iteration; denominators carry a 1e-12 floor; both
// factors start from seeded uniform (0,1] entries filled column-major,
// W first.  Stops when the relative objective decrease over an update pair
// falls below tol.
TopicModel nmf(const Eigen::MatrixXd& x, int n_topics, int max_iter,
               double tol, std::uint64_t seed);

// Heaviest n terms per topic; ties resolved toward the earlier vocabulary
// index.
std::vector<std::vector<std::string>> top_words(
    const TopicModel& model, const std::vector<std::string>& vocabulary,
    int n);

struct TopicLog {
  InfectionLog log;
  Eigen::MatrixXd volumes;         // T x K; row d+1 <-> day d
  std::vector<std::string> users;  // node_id u <-> users[u-1]
};

// Assigns each document the argmax topic of its W row (ties toward the
// lower topic index), converts timestamps to day offsets from the earliest
// date, emits one event per (user, topic, day) and counts documents per
// (day, topic).
TopicLog build_log(const Corpus& corpus, const TopicModel& model);

}  // namespace mtlim
