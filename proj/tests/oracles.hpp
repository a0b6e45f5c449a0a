#pragma once

// Brute-force reference computations used only by tests. Nothing here calls
// into the library's numeric code paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace medverify::oracle {

// Whitespace split with ASCII punctuation stripped from both ends. Only valid
// for already-lowercased test text without inner punctuation.
inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string word;
  const std::string punct = ".,!?:;()\"";
  while (in >> word) {
    const auto b = word.find_first_not_of(punct);
    if (b == std::string::npos) continue;
    const auto e = word.find_last_not_of(punct);
    out.push_back(word.substr(b, e - b + 1));
  }
  return out;
}

inline std::size_t count_word(const std::vector<std::string>& texts, const std::string& word) {
  std::size_t n = 0;
  for (const auto& t : texts) {
    for (const auto& w : split_words(t)) n += (w == word);
  }
  return n;
}

inline std::size_t count_window(const std::vector<std::string>& texts,
                                const std::vector<std::string>& phrase) {
  std::size_t n = 0;
  for (const auto& t : texts) {
    const auto words = split_words(t);
    for (std::size_t i = 0; i + phrase.size() <= words.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < phrase.size(); ++k) match = match && words[i + k] == phrase[k];
      n += match;
    }
  }
  return n;
}

inline double distance(const std::vector<double>& ref, const std::vector<double>& user,
                       const std::vector<double>& weights) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const long double d = static_cast<long double>(ref[i]) - static_cast<long double>(user[i]);
    acc += d * d * static_cast<long double>(weights[i]);
  }
  return static_cast<double>(std::sqrt(acc));
}

inline std::vector<double> mean(const std::vector<std::vector<double>>& vectors) {
  std::vector<double> out(vectors.front().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<long double> column;
    for (const auto& v : vectors) column.push_back(v[i]);
    std::sort(column.begin(), column.end());
    long double s = 0.0L;
    for (const auto x : column) s += x;
    out[i] = static_cast<double>(s / static_cast<long double>(vectors.size()));
  }
  return out;
}

// Between/within variance ratio straight from the definition, per indicator.
inline std::vector<double> fisher_scores(
    const std::map<std::string, std::vector<std::vector<double>>>& classes, double epsilon,
    double cap) {
  const std::size_t dims = classes.begin()->second.front().size();
  long double total = 0.0L;
  for (const auto& [id, members] : classes) total += members.size();
  std::vector<double> scores(dims);
  for (std::size_t i = 0; i < dims; ++i) {
    long double grand = 0.0L;
    for (const auto& [id, members] : classes) {
      for (const auto& v : members) grand += v[i];
    }
    grand /= total;
    long double between = 0.0L, within = 0.0L;
    for (const auto& [id, members] : classes) {
      long double mu = 0.0L;
      for (const auto& v : members) mu += v[i];
      mu /= members.size();
      long double var = 0.0L;
      for (const auto& v : members) var += (v[i] - mu) * (v[i] - mu);
      var /= members.size();
      const long double share = members.size() / total;
      between += share * (mu - grand) * (mu - grand);
      within += share * var;
    }
    const long double s = between / (within + epsilon);
    scores[i] = static_cast<double>(std::min<long double>(std::max<long double>(s, 0.0L), cap));
  }
  return scores;
}

inline double relative_error(double actual, double expected) {
  const double scale = std::max(std::fabs(expected), 1e-300);
  if (actual == expected) return 0.0;
  return std::fabs(actual - expected) / scale;
}

}  // namespace medverify::oracle
