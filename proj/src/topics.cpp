#include "mtlim/topics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "mtlim/rng.hpp"

namespace mtlim {

namespace {

bool looks_like_url(const std::string& tok) {
  size_t pos = tok.find("://");
  if (pos == std::string::npos || pos == 0) return false;
  if (!std::islower(static_cast<unsigned char>(tok[0]))) return false;
  for (size_t i = 1; i < pos; ++i) {
    char c = tok[i];
    if (!std::islower(static_cast<unsigned char>(c)) &&
        !std::isdigit(static_cast<unsigned char>(c)) && c != '+' && c != '.' &&
        c != '-')
      return false;
  }
  return true;
}

std::vector<std::string> tokenize(const std::string& text,
                                  const std::set<std::string>& stop) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text)
    lower.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  std::vector<std::string> out;
  size_t i = 0;
  while (i < lower.size()) {
    while (i < lower.size() &&
           std::isspace(static_cast<unsigned char>(lower[i])))
      ++i;
    size_t j = i;
    while (j < lower.size() &&
           !std::isspace(static_cast<unsigned char>(lower[j])))
      ++j;
    if (j == i) break;
    std::string tok = lower.substr(i, j - i);
    i = j;
    if (tok[0] == '@') continue;       // mention
    if (looks_like_url(tok)) continue; // URL, checked before symbol removal
    std::string clean;
    for (char c : tok)
      if (std::isalnum(static_cast<unsigned char>(c))) clean.push_back(c);
    if (clean.size() < 2) continue;
    if (stop.count(clean)) continue;
    out.push_back(std::move(clean));
  }
  return out;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

long parse_day(const std::string& stamp, size_t doc_index) {
  int y, mo, d, h, mi, s;
  char tail;
  int got = std::sscanf(stamp.c_str(), "%d-%d-%d %d:%d:%d%c", &y, &mo, &d, &h,
                        &mi, &s, &tail);
  bool ok = got == 6 && y >= 1 && mo >= 1 && mo <= 12 && d >= 1 && d <= 31 &&
            h >= 0 && h <= 23 && mi >= 0 && mi <= 59 && s >= 0 && s <= 60;
  if (!ok)
    throw std::runtime_error("unparseable timestamp \"" + stamp +
                             "\" in document " + std::to_string(doc_index));
  return days_from_civil(y, mo, d);
}

}  // namespace

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "the",   "and",  "for",   "are",   "but",  "not",  "you",   "all",
      "any",   "can",  "had",   "her",   "was",  "one",  "our",   "out",
      "day",   "get",  "has",   "him",   "his",  "how",  "man",   "new",
      "now",   "old",  "see",   "two",   "way",  "who",  "its",   "did",
      "let",   "she",  "too",   "use",   "that", "with", "have",  "this",
      "will",  "your", "from",  "they",  "know", "want", "been",  "good",
      "much",  "some", "time",  "very",  "when", "come", "here",  "just",
      "like",  "long", "make",  "many",  "more", "only", "over",  "such",
      "take",  "than", "them",  "well",  "were", "what", "into",  "also",
      "about", "then", "there", "these", "would", "could", "should", "their",
      "which", "while", "after", "before", "because", "being", "both",
      "each",  "few",  "other", "same",  "most", "went", "again", "off",
      "own",   "via",  "per",   "still", "even"};
  return words;
}

Corpus preprocess(const std::vector<RawDocument>& raw,
                  const std::vector<std::string>& stopwords) {
  std::set<std::string> stop(stopwords.begin(), stopwords.end());

  // Pass 1: tokenize and accumulate document frequencies.
  std::vector<std::vector<std::string>> tokens(raw.size());
  std::map<std::string, int> df;
  for (size_t d = 0; d < raw.size(); ++d) {
    tokens[d] = tokenize(raw[d].text, stop);
    std::set<std::string> uniq(tokens[d].begin(), tokens[d].end());
    for (const auto& t : uniq) ++df[t];
  }

  // Pass 2: keep terms in >= 3 documents, number vocabulary and users by
  // first appearance, drop documents left empty.
  Corpus corpus;
  std::map<std::string, int> vocab_id;
  std::map<std::string, int> user_id;
  for (size_t d = 0; d < raw.size(); ++d) {
    Corpus::Doc doc;
    for (const auto& t : tokens[d]) {
      if (df[t] < 3) continue;
      auto it = vocab_id.find(t);
      if (it == vocab_id.end()) {
        it = vocab_id.emplace(t, static_cast<int>(corpus.vocabulary.size()))
                 .first;
        corpus.vocabulary.push_back(t);
      }
      doc.terms.push_back(it->second);
    }
    if (doc.terms.empty()) {
      ++corpus.dropped_documents;
      continue;
    }
    auto uit = user_id.find(raw[d].user);
    if (uit == user_id.end()) {
      uit = user_id.emplace(raw[d].user, static_cast<int>(corpus.users.size()))
                .first;
      corpus.users.push_back(raw[d].user);
    }
    doc.user = uit->second;
    doc.timestamp = raw[d].timestamp;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Eigen::MatrixXd tfidf(const Corpus& corpus) {
  const int n_docs = static_cast<int>(corpus.documents.size());
  const int n_terms = static_cast<int>(corpus.vocabulary.size());
  if (n_docs == 0 || n_terms == 0)
    throw std::invalid_argument("tfidf: corpus is empty");

  Eigen::VectorXd df = Eigen::VectorXd::Zero(n_terms);
  for (const auto& doc : corpus.documents) {
    std::set<int> uniq(doc.terms.begin(), doc.terms.end());
    for (int v : uniq) df(v) += 1.0;
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_docs, n_terms);
  for (int d = 0; d < n_docs; ++d)
    for (int v : corpus.documents[d].terms) x(d, v) += 1.0;
  for (int v = 0; v < n_terms; ++v) {
    double idf = 1.0 + std::log(static_cast<double>(n_docs) / (1.0 + df(v)));
    x.col(v) *= idf;
  }
  return x;
}

TopicModel nmf(const Eigen::MatrixXd& x, int n_topics, int max_iter,
               double tol, std::uint64_t seed) {
  if ((x.array() < 0.0).any())
    throw std::invalid_argument("nmf: X must be nonnegative");
  if (n_topics < 1 || n_topics > std::min(x.rows(), x.cols()))
    throw std::invalid_argument("nmf: n_topics must be in 1..min(D, V)");
  if (max_iter < 1 || tol < 0.0)
    throw std::invalid_argument("nmf: bad iteration cap or tolerance");

  constexpr double eps = 1e-12;
  Rng rng(seed);
  TopicModel model;
  model.w.resize(x.rows(), n_topics);
  for (int j = 0; j < n_topics; ++j)
    for (int i = 0; i < x.rows(); ++i)
      model.w(i, j) = rng.uniform01_open_low();
  model.h.resize(n_topics, x.cols());
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < n_topics; ++i)
      model.h(i, j) = rng.uniform01_open_low();

  double prev = (x - model.w * model.h).squaredNorm();
  for (int it = 1; it <= max_iter; ++it) {
    model.iterations = it;
    // H then W, each a standard multiplicative update with floored
    // denominators.
    Eigen::MatrixXd wt_x = model.w.transpose() * x;
    Eigen::MatrixXd wt_w_h = model.w.transpose() * model.w * model.h;
    model.h.array() *= wt_x.array() / (wt_w_h.array() + eps);

    Eigen::MatrixXd x_ht = x * model.h.transpose();
    Eigen::MatrixXd w_h_ht = model.w * (model.h * model.h.transpose());
    model.w.array() *= x_ht.array() / (w_h_ht.array() + eps);

    double obj = (x - model.w * model.h).squaredNorm();
    model.objective_trace.push_back(obj);
    if (prev - obj < tol * std::max(prev, eps)) {
      model.converged = true;
      break;
    }
    prev = obj;
  }
  return model;
}

std::vector<std::vector<std::string>> top_words(
    const TopicModel& model, const std::vector<std::string>& vocabulary,
    int n) {
  if (model.h.cols() != static_cast<int>(vocabulary.size()))
    throw std::invalid_argument("top_words: vocabulary size mismatch");
  if (n < 1) throw std::invalid_argument("top_words: n must be >= 1");
  std::vector<std::vector<std::string>> out;
  const int take = std::min<int>(n, static_cast<int>(vocabulary.size()));
  for (int k = 0; k < model.h.rows(); ++k) {
    std::vector<int> order(vocabulary.size());
    for (size_t v = 0; v < order.size(); ++v) order[v] = static_cast<int>(v);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return model.h(k, a) > model.h(k, b);  // stable sort keeps ties in
    });                                      // vocabulary order
    std::vector<std::string> words;
    for (int i = 0; i < take; ++i) words.push_back(vocabulary[order[i]]);
    out.push_back(std::move(words));
  }
  return out;
}

TopicLog build_log(const Corpus& corpus, const TopicModel& model) {
  if (corpus.documents.empty())
    throw std::invalid_argument("build_log: corpus is empty");
  if (model.w.rows() != static_cast<int>(corpus.documents.size()))
    throw std::invalid_argument("build_log: model does not match corpus");
  const int n_topics = static_cast<int>(model.w.cols());

  std::vector<long> day(corpus.documents.size());
  long min_day = 0;
  bool first = true;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    day[d] = parse_day(corpus.documents[d].timestamp, d);
    if (first || day[d] < min_day) min_day = day[d];
    first = false;
  }
  long horizon = 0;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    day[d] -= min_day;
    horizon = std::max(horizon, day[d] + 1);
  }

  TopicLog out;
  out.users = corpus.users;
  out.volumes = Eigen::MatrixXd::Zero(horizon, n_topics);
  std::vector<Event> events;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    int topic = 0;
    for (int k = 1; k < n_topics; ++k)
      if (model.w(static_cast<int>(d), k) >
          model.w(static_cast<int>(d), topic))
        topic = k;  // strict > keeps ties at the lowest index
    int t = static_cast<int>(day[d]);
    events.push_back({corpus.documents[d].user + 1, topic + 1, t});
    out.volumes(t, topic) += 1.0;
  }
  out.log = InfectionLog::create(static_cast<int>(corpus.users.size()),
                                 n_topics, static_cast<int>(horizon),
                                 std::move(events));
  return out;
}

}  // namespace mtlim
