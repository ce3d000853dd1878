#include "marlens/metrics.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace marlens {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "marlens.metrics";
constexpr int kVersion = 1;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
  return v;
}

json event_to_json(const MetricsEvent& e) {
  json j;
  if (const auto* p = std::get_if<EvalPoint>(&e)) {
    j["type"] = "eval";
    j["step"] = p->step;
    j["agent_returns"] = p->agent_returns;
    j["team_return"] = p->team_return;
  } else if (const auto* d = std::get_if<DiagnosticsRecord>(&e)) {
    j["type"] = "diagnostics";
    j["step"] = d->step;
    j["entropy"] = d->entropy;
    j["divergence"] = d->divergence;
    j["mean_entropy"] = d->mean_entropy;
    j["mean_divergence"] = d->mean_divergence;
  } else if (const auto* t = std::get_if<TaskSwitchEvent>(&e)) {
    j["type"] = "taskswitch";
    j["step"] = t->step;
    j["mode"] = t->profile.mode == TaskSwitchMode::RawCounts ? "raw_counts"
                                                              : "frequency_normalized";
    json counts = json::array(), lik = json::array();
    for (const auto& c : t->profile.counts) counts.push_back(vec_to_json(c));
    for (const auto& l : t->profile.likelihood) lik.push_back(vec_to_json(l));
    j["counts"] = counts;
    j["likelihood"] = lik;
  } else {
    const auto& l = std::get<TrainLoss>(e);
    j["type"] = "loss";
    j["step"] = l.step;
    j["loss"] = l.loss;
    j["epsilon"] = l.epsilon;
  }
  return j;
}

MetricsEvent event_from_json(const json& j, int line) {
  const std::string type = j.at("type");
  if (type == "eval") {
    EvalPoint p;
    p.step = j.at("step");
    p.agent_returns = j.at("agent_returns").get<std::vector<double>>();
    p.team_return = j.at("team_return");
    return p;
  }
  if (type == "diagnostics") {
    DiagnosticsRecord d;
    d.step = j.at("step");
    d.entropy = j.at("entropy").get<std::vector<double>>();
    d.divergence = j.at("divergence").get<std::vector<double>>();
    d.mean_entropy = j.at("mean_entropy");
    d.mean_divergence = j.at("mean_divergence");
    return d;
  }
  if (type == "taskswitch") {
    TaskSwitchEvent t;
    t.step = j.at("step");
    const std::string mode = j.at("mode");
    t.profile.mode = mode == "raw_counts" ? TaskSwitchMode::RawCounts
                                           : TaskSwitchMode::FrequencyNormalized;
    for (const auto& c : j.at("counts")) t.profile.counts.push_back(vec_from_json(c));
    for (const auto& l : j.at("likelihood"))
      t.profile.likelihood.push_back(vec_from_json(l));
    return t;
  }
  if (type == "loss") {
    TrainLoss l;
    l.step = j.at("step");
    l.loss = j.at("loss");
    l.epsilon = j.at("epsilon");
    return l;
  }
  throw ParseError("unknown event type '" + type + "'", line);
}

} // namespace

long event_step(const MetricsEvent& e) {
  return std::visit([](const auto& x) { return x.step; }, e);
}

bool operator==(const EvalPoint& a, const EvalPoint& b) {
  return a.step == b.step && a.agent_returns == b.agent_returns &&
         a.team_return == b.team_return;
}

bool operator==(const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
  return a.step == b.step && a.entropy == b.entropy && a.divergence == b.divergence &&
         a.mean_entropy == b.mean_entropy && a.mean_divergence == b.mean_divergence;
}

bool operator==(const TaskSwitchEvent& a, const TaskSwitchEvent& b) {
  auto eq = [](const std::vector<Eigen::VectorXd>& x, const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].size() != y[i].size() || x[i] != y[i]) return false;
    return true;
  };
  return a.step == b.step && a.profile.mode == b.profile.mode &&
         eq(a.profile.counts, b.profile.counts) &&
         eq(a.profile.likelihood, b.profile.likelihood);
}

bool operator==(const TrainLoss& a, const TrainLoss& b) {
  return a.step == b.step && a.loss == b.loss && a.epsilon == b.epsilon;
}

std::string metrics_path(const std::string& run_dir) {
  return run_dir + "/metrics.jsonl";
}

void write_metrics(const std::string& run_dir, const std::vector<MetricsEvent>& events) {
  long prev = -1;
  for (const auto& e : events) {
    const long s = event_step(e);
    if (s < prev) throw std::logic_error("metrics events out of step order");
    prev = s;
  }
  std::ofstream out(metrics_path(run_dir), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + metrics_path(run_dir));
  json header;
  header["schema"] = kSchema;
  header["version"] = kVersion;
  out << header.dump() << '\n';
  for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

std::vector<MetricsEvent> read_metrics(const std::string& run_dir) {
  std::ifstream in(metrics_path(run_dir));
  if (!in) throw std::runtime_error("cannot read " + metrics_path(run_dir));
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("schema", "") != kSchema ||
      header.value("version", -1) != kVersion)
    throw ParseError("bad header", 1);
  std::vector<MetricsEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed record", line_no);
    try {
      events.push_back(event_from_json(j, line_no));
    } catch (const json::exception& ex) {
      throw ParseError(ex.what(), line_no);
    }
  }
  return events;
}

} // namespace marlens
