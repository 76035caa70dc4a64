#include "mtlim/diffusion_data.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtlim {

namespace {

bool event_order(const Event& a, const Event& b) {
  if (a.contagion != b.contagion) return a.contagion < b.contagion;
  if (a.node != b.node) return a.node < b.node;
  return a.time < b.time;
}

void check_bounds(const Event& ev, int n_nodes, int n_contagions, int horizon,
                  long line_no) {
  auto fail = [&](const std::string& what) {
    std::string where =
        line_no > 0 ? " at line " + std::to_string(line_no) : "";
    throw std::invalid_argument("event " + what + where);
  };
  if (ev.node < 1 || ev.node > n_nodes)
    fail("node index " + std::to_string(ev.node) + " outside 1.." +
         std::to_string(n_nodes));
  if (ev.contagion < 1 || ev.contagion > n_contagions)
    fail("contagion index " + std::to_string(ev.contagion) + " outside 1.." +
         std::to_string(n_contagions));
  if (ev.time < 0 || ev.time > horizon)
    fail("time " + std::to_string(ev.time) + " outside 0.." +
         std::to_string(horizon));
}

bool parse_int_field(std::string_view field, int& out) {
  size_t b = field.find_first_not_of(" \t");
  if (b == std::string_view::npos) return false;
  size_t e = field.find_last_not_of(" \t");
  std::string_view body = field.substr(b, e - b + 1);
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), out);
  return ec == std::errc() && ptr == body.data() + body.size();
}

bool parse_event_line(const std::string& line, Event& ev) {
  size_t c1 = line.find(',');
  if (c1 == std::string::npos) return false;
  size_t c2 = line.find(',', c1 + 1);
  if (c2 == std::string::npos) return false;
  if (line.find(',', c2 + 1) != std::string::npos) return false;
  std::string_view sv(line);
  return parse_int_field(sv.substr(0, c1), ev.node) &&
         parse_int_field(sv.substr(c1 + 1, c2 - c1 - 1), ev.contagion) &&
         parse_int_field(sv.substr(c2 + 1), ev.time);
}

}  // namespace

InfectionLog InfectionLog::create(int n_nodes, int n_contagions, int horizon,
                                  std::vector<Event> events) {
  if (n_nodes < 1 || n_contagions < 1 || horizon < 1)
    throw std::invalid_argument(
        "InfectionLog: n_nodes, n_contagions and horizon must be >= 1");
  for (const Event& ev : events)
    check_bounds(ev, n_nodes, n_contagions, horizon, 0);

  std::sort(events.begin(), events.end(), event_order);
  long before = static_cast<long>(events.size());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  InfectionLog log;
  log.n_nodes = n_nodes;
  log.n_contagions = n_contagions;
  log.horizon = horizon;
  log.duplicates_collapsed = before - static_cast<long>(events.size());
  log.events = std::move(events);
  return log;
}

bool InfectionLog::has_event(int node, int contagion, int time) const {
  Event key{node, contagion, time};
  auto it = std::lower_bound(events.begin(), events.end(), key, event_order);
  return it != events.end() && *it == key;
}

InfectionLog load_events(std::istream& in, int n_nodes, int n_contagions,
                         int horizon) {
  std::vector<Event> events;
  std::string line;
  long line_no = 0;
  bool allow_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Event ev;
    if (!parse_event_line(line, ev)) {
      if (allow_header) {
        allow_header = false;
        continue;
      }
      throw std::runtime_error("malformed event record at line " +
                               std::to_string(line_no));
    }
    allow_header = false;
    check_bounds(ev, n_nodes, n_contagions, horizon, line_no);
    events.push_back(ev);
  }
  if (events.empty())
    throw std::runtime_error("event input contains no records");
  return InfectionLog::create(n_nodes, n_contagions, horizon,
                              std::move(events));
}

Eigen::MatrixXd build_volume(const InfectionLog& log) {
  Eigen::MatrixXd volume =
      Eigen::MatrixXd::Zero(log.horizon, log.n_contagions);
  for (const Event& ev : log.events)
    if (ev.time >= 1) volume(ev.time - 1, ev.contagion - 1) += 1.0;
  return volume;
}

std::vector<Eigen::MatrixXd> build_design(const InfectionLog& log, int lag) {
  if (lag < 1 || lag > log.horizon)
    throw std::invalid_argument("build_design: lag must be in 1..horizon");
  const int cols = lag * log.n_nodes;
  std::vector<Eigen::MatrixXd> design(
      log.n_contagions, Eigen::MatrixXd::Zero(log.horizon, cols));
  for (const Event& ev : log.events) {
    Eigen::MatrixXd& mk = design[ev.contagion - 1];
    for (int l = 1; l <= lag; ++l) {
      int row = ev.time + l;  // time step whose window reaches this event
      if (row >= 1 && row <= log.horizon)
        mk(row - 1, (ev.node - 1) * lag + (l - 1)) = 1.0;
    }
  }
  return design;
}

Eigen::VectorXd predict_volume(const InfectionLog& log,
                               const Eigen::MatrixXd& influence,
                               int t_target) {
  if (influence.cols() != log.n_contagions ||
      influence.rows() % log.n_nodes != 0 || influence.rows() == 0)
    throw std::invalid_argument(
        "predict_volume: influence shape does not match the log");
  if (t_target < 1)
    throw std::invalid_argument("predict_volume: t_target must be >= 1");
  const int lag = static_cast<int>(influence.rows()) / log.n_nodes;

  Eigen::VectorXd out(log.n_contagions);
  for (int k = 1; k <= log.n_contagions; ++k) {
    // Scalar accumulation in design-column order keeps the result
    // bit-identical to a left-to-right walk over the design row.
    double acc = 0.0;
    for (int u = 1; u <= log.n_nodes; ++u)
      for (int l = 1; l <= lag; ++l) {
        int t = t_target - l;
        if (t < 0 || t > log.horizon) continue;
        if (log.has_event(u, k, t))
          acc += influence((u - 1) * lag + (l - 1), k - 1);
      }
    out(k - 1) = acc;
  }
  return out;
}

}  // namespace mtlim
