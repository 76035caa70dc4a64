#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mtlim/diffusion_data.hpp"
#include "mtlim/topics.hpp"

namespace mtlim {

// Shortest text that round-trips a double exactly (17 significant digits).
std::string format_g17(double v);

// Plain comma-separated numeric matrices, no header, one row per line,
// every value written with format_g17.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// One value per line.
void write_values_csv(const std::string& path,
                      const std::vector<double>& values);

// "node_id,contagion_id,time" with a header row, canonical event order.
void write_events_csv(const std::string& path, const InfectionLog& log);
InfectionLog read_events_csv(const std::string& path, int n_nodes,
                             int n_contagions, int horizon);

// Flat "key = value" configuration, '#' comments and blank lines allowed,
// duplicate keys rejected.
std::map<std::string, std::string> read_config(const std::string& path);
void write_config(const std::string& path,
                  const std::map<std::string, std::string>& kv);

// "username,timestamp,tweet_text" with RFC-style quoting (quoted fields may
// contain commas, doubled quotes and newlines).  A first record equal to
// the column names is treated as a header.
std::vector<RawDocument> read_tweets_csv(const std::string& path);

}  // namespace mtlim
