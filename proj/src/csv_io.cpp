#include "mtlim/csv_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mtlim {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& path,
                    long line_no) {
  const std::string body = trim(field);
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(body.c_str(), &end);
  if (body.empty() || end != body.c_str() + body.size() || errno == ERANGE)
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": cannot parse number \"" + field + "\"");
  return v;
}

// One RFC-style record; quoted fields may span lines.  Returns false at EOF
// with no data consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;         // inside a quoted field
  bool field_started = false;  // any character seen in the current field
  while (true) {
    if (c == EOF) {
      if (quoted) throw std::runtime_error("unterminated quoted field");
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(field);
      return true;
    }
    if (quoted) {
      if (c == '"') {
        int nxt = in.get();
        if (nxt == '"') {
          field.push_back('"');
          c = in.get();
        } else {
          quoted = false;
          c = nxt;
        }
      } else {
        field.push_back(static_cast<char>(c));
        c = in.get();
      }
      continue;
    }
    if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(field);
      return true;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
      field_started = false;
    } else {
      field.push_back(static_cast<char>(c));
      field_started = true;
    }
    c = in.get();
  }
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_g17(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
      row.push_back(parse_double(field, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  return m;
}

void write_values_csv(const std::string& path,
                      const std::vector<double>& values) {
  std::ofstream out = open_out(path);
  for (double v : values) out << format_g17(v) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_events_csv(const std::string& path, const InfectionLog& log) {
  std::ofstream out = open_out(path);
  out << "node_id,contagion_id,time\n";
  for (const Event& ev : log.events)
    out << ev.node << ',' << ev.contagion << ',' << ev.time << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

InfectionLog read_events_csv(const std::string& path, int n_nodes,
                             int n_contagions, int horizon) {
  std::ifstream in = open_in(path);
  try {
    return load_events(in, n_nodes, n_contagions, horizon);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": empty key");
    if (!kv.emplace(key, value).second)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate key \"" + key + "\"");
  }
  return kv;
}

void write_config(const std::string& path,
                  const std::map<std::string, std::string>& kv) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<RawDocument> read_tweets_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<RawDocument> docs;
  std::vector<std::string> fields;
  bool first = true;
  long record_no = 0;
  while (read_record(in, fields)) {
    ++record_no;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != 3)
      throw std::runtime_error(path + ": record " +
                               std::to_string(record_no) +
                               " must have 3 fields");
    if (first && trim(fields[0]) == "username" &&
        trim(fields[1]) == "timestamp" && trim(fields[2]) == "tweet_text") {
      first = false;
      continue;
    }
    first = false;
    docs.push_back({trim(fields[0]), trim(fields[1]), fields[2]});
  }
  if (docs.empty()) throw std::runtime_error(path + ": no tweets");
  return docs;
}

}  // namespace mtlim
