#include "irsmec/config.hpp"

#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace irsmec {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_tokens(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& tok) {
  throw std::invalid_argument("config: bad value '" + tok + "' for key '" + key + "'");
}

double to_double(const std::string& key, const std::string& tok) {
  double v{};
  const auto* end = tok.data() + tok.size();
  const auto r = std::from_chars(tok.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) bad_value(key, tok);
  return v;
}

long long to_ll(const std::string& key, const std::string& tok) {
  long long v{};
  const auto* end = tok.data() + tok.size();
  const auto r = std::from_chars(tok.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) bad_value(key, tok);
  return v;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

/// Raw key/value entries with consumption tracking, so anything left over
/// at the end is reported as an unknown key.
class Entries {
 public:
  void add(std::string key, std::string value, int line) {
    if (map_.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "' on line " +
                                  std::to_string(line));
    map_.emplace(std::move(key), Entry{std::move(value), line});
  }

  std::optional<std::string> take(const std::string& key) {
    const auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    std::string v = it->second.value;
    map_.erase(it);
    return v;
  }

  void finish() const {
    if (map_.empty()) return;
    const auto& [key, entry] = *map_.begin();
    throw std::invalid_argument("config: unknown key '" + key + "' on line " +
                                std::to_string(entry.line));
  }

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> map_;
};

void take_double(Entries& e, const std::string& key, double& field) {
  if (auto v = e.take(key)) field = to_double(key, trim(*v));
}

void take_opt_double(Entries& e, const std::string& key, std::optional<double>& field) {
  if (auto v = e.take(key)) field = to_double(key, trim(*v));
}

void take_int(Entries& e, const std::string& key, int& field) {
  if (auto v = e.take(key)) {
    const long long raw = to_ll(key, trim(*v));
    if (raw < INT_MIN || raw > INT_MAX) bad_value(key, trim(*v));
    field = static_cast<int>(raw);
  }
}

void take_u64(Entries& e, const std::string& key, std::uint64_t& field) {
  if (auto v = e.take(key)) {
    const std::string tok = trim(*v);
    std::uint64_t raw{};
    const auto* end = tok.data() + tok.size();
    const auto r = std::from_chars(tok.data(), end, raw);
    if (r.ec != std::errc{} || r.ptr != end) bad_value(key, tok);
    field = raw;
  }
}

/// One value broadcasts to all users; otherwise exactly `users` values.
std::optional<RVector> take_user_list(Entries& e, const std::string& key, int users) {
  const auto v = e.take(key);
  if (!v) return std::nullopt;
  const auto toks = split_tokens(*v);
  if (toks.empty()) throw std::invalid_argument("config: empty value for key '" + key + "'");
  if (toks.size() != 1 && toks.size() != static_cast<size_t>(users))
    throw std::invalid_argument("config: key '" + key + "' needs 1 or " + std::to_string(users) +
                                " values, got " + std::to_string(toks.size()));
  RVector out(users);
  for (int k = 0; k < users; ++k)
    out(k) = to_double(key, toks[toks.size() == 1 ? 0 : static_cast<size_t>(k)]);
  return out;
}

void take_task_field(Entries& e, const std::string& key, std::vector<TaskProfile>& tasks,
                     double TaskProfile::* member) {
  if (const auto v = take_user_list(e, key, static_cast<int>(tasks.size()))) {
    for (size_t k = 0; k < tasks.size(); ++k) tasks[k].*member = (*v)(static_cast<Eigen::Index>(k));
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + what);
}

std::string join(const RVector& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt(v(i));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  Entries entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value' on line " +
                                  std::to_string(lineno));
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: missing key on line " + std::to_string(lineno));
    entries.add(key, value, lineno);
  }

  ExperimentConfig cfg;
  take_int(entries, "ap_antennas", cfg.ap_antennas);
  take_int(entries, "users", cfg.users);
  require(cfg.users >= 1, "users must be at least 1");

  if (const auto v = entries.take("n_elements")) {
    cfg.n_elements.clear();
    for (const auto& tok : split_tokens(*v)) {
      const long long n = to_ll("n_elements", tok);
      if (n < 0 || n > INT_MAX) bad_value("n_elements", tok);
      cfg.n_elements.push_back(static_cast<int>(n));
    }
  }

  take_opt_double(entries, "user_spacing", cfg.user_spacing);
  take_opt_double(entries, "user_offset", cfg.user_offset);
  take_opt_double(entries, "penetration_loss_db", cfg.penetration_loss_db);
  take_opt_double(entries, "pathloss_exponent_user", cfg.pathloss_exponent_user);
  take_opt_double(entries, "pathloss_exponent_ap_irs", cfg.pathloss_exponent_ap_irs);
  take_opt_double(entries, "noise_mw", cfg.noise_mw);
  take_opt_double(entries, "tx_power_mw", cfg.tx_power_mw);

  take_double(entries, "rate_min", cfg.rate_min);
  take_double(entries, "rate_max", cfg.rate_max);
  take_double(entries, "rate_step", cfg.rate_step);
  take_opt_double(entries, "rate_floor", cfg.rate_floor);

  take_int(entries, "trials", cfg.trials);
  take_u64(entries, "seed", cfg.seed);
  take_int(entries, "threads", cfg.threads);
  if (const auto v = entries.take("out")) cfg.out_dir = *v;

  cfg.tasks.assign(static_cast<size_t>(cfg.users), TaskProfile{});
  take_task_field(entries, "task_data_bits", cfg.tasks, &TaskProfile::data_bits);
  take_task_field(entries, "task_cpu_cycles", cfg.tasks, &TaskProfile::cpu_cycles);
  take_task_field(entries, "task_local_rate_cps", cfg.tasks, &TaskProfile::local_rate_cps);
  take_task_field(entries, "task_edge_rate_cps", cfg.tasks, &TaskProfile::edge_rate_cps);
  take_task_field(entries, "task_energy_per_cycle_j", cfg.tasks, &TaskProfile::energy_per_cycle_j);
  take_task_field(entries, "task_tx_power_w", cfg.tasks, &TaskProfile::tx_power_w);
  take_task_field(entries, "task_tail_energy_j", cfg.tasks, &TaskProfile::tail_energy_j);
  take_task_field(entries, "task_time_weight", cfg.tasks, &TaskProfile::time_weight);
  take_task_field(entries, "task_energy_weight", cfg.tasks, &TaskProfile::energy_weight);
  take_task_field(entries, "task_benefit", cfg.tasks, &TaskProfile::task_benefit);
  cfg.cost_scale = take_user_list(entries, "cost_scale", cfg.users);
  cfg.edge_advantage = take_user_list(entries, "edge_advantage", cfg.users);

  take_int(entries, "restarts", cfg.feasibility.restarts);
  take_double(entries, "conv_tol", cfg.feasibility.conv_tol);
  take_int(entries, "max_feasibility_iterations", cfg.feasibility.max_iterations);
  take_double(entries, "newton_tol", cfg.sumratio.newton_tol);
  take_int(entries, "max_newton_iterations", cfg.sumratio.max_newton_iterations);
  take_double(entries, "inner_tol", cfg.sumratio.inner_tol);
  take_int(entries, "max_inner_iterations", cfg.sumratio.max_inner_iterations);
  take_double(entries, "backtrack_shrink", cfg.sumratio.backtrack_shrink);
  take_double(entries, "backtrack_slack", cfg.sumratio.backtrack_slack);
  take_int(entries, "max_backtrack", cfg.sumratio.max_backtrack);
  take_double(entries, "kkt_tol", cfg.feasibility.qcqp.kkt_tol);
  take_double(entries, "feas_tol", cfg.feasibility.qcqp.feas_tol);
  entries.finish();

  cfg.feasibility.seed = cfg.seed;
  cfg.sumratio.qcqp = cfg.feasibility.qcqp;
  cfg.sumratio.feasibility = cfg.feasibility;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
  require(ap_antennas >= 1, "ap_antennas must be at least 1");
  require(users >= 1, "users must be at least 1");
  require(!n_elements.empty(), "n_elements must list at least one size");
  for (int n : n_elements) require(n >= 0, "n_elements entries must be non-negative");
  require(rate_step > 0.0, "rate_step must be positive");
  require(rate_min >= 0.0, "rate_min must be non-negative");
  require(rate_min <= rate_max, "rate sweep needs rate_min <= rate_max");
  require(!rate_floor || *rate_floor >= 0.0, "rate_floor must be non-negative");
  require(trials >= 1, "trials must be at least 1");
  require(threads >= 0, "threads must be non-negative");
  require(!out_dir.empty(), "out must name a directory");
  require(tasks.empty() || tasks.size() == static_cast<size_t>(users),
          "one task profile per user");
  for (const auto& t : tasks) t.validate();
  require(!cost_scale || cost_scale->size() == users, "cost_scale sized for users");
  require(!cost_scale || (cost_scale->array() >= 0.0).all(), "cost_scale must be non-negative");
  require(!edge_advantage || edge_advantage->size() == users, "edge_advantage sized for users");
  require(!user_spacing || *user_spacing > 0.0, "user_spacing must be positive");
  require(!penetration_loss_db || *penetration_loss_db >= 0.0,
          "penetration_loss_db must be non-negative");
  require(!pathloss_exponent_user || *pathloss_exponent_user > 0.0,
          "pathloss_exponent_user must be positive");
  require(!pathloss_exponent_ap_irs || *pathloss_exponent_ap_irs > 0.0,
          "pathloss_exponent_ap_irs must be positive");
  require(!noise_mw || *noise_mw > 0.0, "noise_mw must be positive");
  require(!tx_power_mw || *tx_power_mw > 0.0, "tx_power_mw must be positive");

  require(feasibility.restarts >= 1, "restarts must be at least 1");
  require(feasibility.conv_tol > 0.0, "conv_tol must be positive");
  require(feasibility.max_iterations >= 1, "max_feasibility_iterations must be at least 1");
  require(sumratio.newton_tol > 0.0, "newton_tol must be positive");
  require(sumratio.max_newton_iterations >= 1, "max_newton_iterations must be at least 1");
  require(sumratio.inner_tol > 0.0, "inner_tol must be positive");
  require(sumratio.max_inner_iterations >= 1, "max_inner_iterations must be at least 1");
  require(sumratio.backtrack_shrink > 0.0 && sumratio.backtrack_shrink < 1.0,
          "backtrack_shrink must lie in (0, 1)");
  require(sumratio.backtrack_slack > 0.0 && sumratio.backtrack_slack < 1.0,
          "backtrack_slack must lie in (0, 1)");
  require(sumratio.max_backtrack >= 0, "max_backtrack must be non-negative");
  require(feasibility.qcqp.kkt_tol > 0.0, "kkt_tol must be positive");
  require(feasibility.qcqp.feas_tol > 0.0, "feas_tol must be positive");
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "ap_antennas = " << c.ap_antennas << '\n';
  out << "users = " << c.users << '\n';
  out << "n_elements =";
  for (int n : c.n_elements) out << ' ' << n;
  out << '\n';
  if (c.user_spacing) out << "user_spacing = " << fmt(*c.user_spacing) << '\n';
  if (c.user_offset) out << "user_offset = " << fmt(*c.user_offset) << '\n';
  if (c.penetration_loss_db)
    out << "penetration_loss_db = " << fmt(*c.penetration_loss_db) << '\n';
  if (c.pathloss_exponent_user)
    out << "pathloss_exponent_user = " << fmt(*c.pathloss_exponent_user) << '\n';
  if (c.pathloss_exponent_ap_irs)
    out << "pathloss_exponent_ap_irs = " << fmt(*c.pathloss_exponent_ap_irs) << '\n';
  if (c.noise_mw) out << "noise_mw = " << fmt(*c.noise_mw) << '\n';
  if (c.tx_power_mw) out << "tx_power_mw = " << fmt(*c.tx_power_mw) << '\n';
  out << "rate_min = " << fmt(c.rate_min) << '\n';
  out << "rate_max = " << fmt(c.rate_max) << '\n';
  out << "rate_step = " << fmt(c.rate_step) << '\n';
  if (c.rate_floor) out << "rate_floor = " << fmt(*c.rate_floor) << '\n';
  out << "trials = " << c.trials << '\n';
  out << "seed = " << c.seed << '\n';
  out << "threads = " << c.threads << '\n';
  out << "out = " << c.out_dir << '\n';

  const std::vector<TaskProfile> tasks =
      c.tasks.empty() ? std::vector<TaskProfile>(static_cast<size_t>(c.users)) : c.tasks;
  const auto task_line = [&](const char* key, double TaskProfile::* member) {
    out << key << " =";
    for (const auto& t : tasks) out << ' ' << fmt(t.*member);
    out << '\n';
  };
  task_line("task_data_bits", &TaskProfile::data_bits);
  task_line("task_cpu_cycles", &TaskProfile::cpu_cycles);
  task_line("task_local_rate_cps", &TaskProfile::local_rate_cps);
  task_line("task_edge_rate_cps", &TaskProfile::edge_rate_cps);
  task_line("task_energy_per_cycle_j", &TaskProfile::energy_per_cycle_j);
  task_line("task_tx_power_w", &TaskProfile::tx_power_w);
  task_line("task_tail_energy_j", &TaskProfile::tail_energy_j);
  task_line("task_time_weight", &TaskProfile::time_weight);
  task_line("task_energy_weight", &TaskProfile::energy_weight);
  task_line("task_benefit", &TaskProfile::task_benefit);
  if (c.cost_scale) out << "cost_scale = " << join(*c.cost_scale) << '\n';
  if (c.edge_advantage) out << "edge_advantage = " << join(*c.edge_advantage) << '\n';

  out << "restarts = " << c.feasibility.restarts << '\n';
  out << "conv_tol = " << fmt(c.feasibility.conv_tol) << '\n';
  out << "max_feasibility_iterations = " << c.feasibility.max_iterations << '\n';
  out << "newton_tol = " << fmt(c.sumratio.newton_tol) << '\n';
  out << "max_newton_iterations = " << c.sumratio.max_newton_iterations << '\n';
  out << "inner_tol = " << fmt(c.sumratio.inner_tol) << '\n';
  out << "max_inner_iterations = " << c.sumratio.max_inner_iterations << '\n';
  out << "backtrack_shrink = " << fmt(c.sumratio.backtrack_shrink) << '\n';
  out << "backtrack_slack = " << fmt(c.sumratio.backtrack_slack) << '\n';
  out << "max_backtrack = " << c.sumratio.max_backtrack << '\n';
  out << "kkt_tol = " << fmt(c.feasibility.qcqp.kkt_tol) << '\n';
  out << "feas_tol = " << fmt(c.feasibility.qcqp.feas_tol) << '\n';
  return out.str();
}

SystemGeometry make_geometry(const ExperimentConfig& c, int irs_elements) {
  SystemGeometry g = default_geometry(c.ap_antennas, c.users, irs_elements);
  if (c.penetration_loss_db) g.penetration_loss_db = *c.penetration_loss_db;
  if (c.pathloss_exponent_user) g.pathloss_exponent_user = *c.pathloss_exponent_user;
  if (c.pathloss_exponent_ap_irs) g.pathloss_exponent_ap_irs = *c.pathloss_exponent_ap_irs;
  if (c.noise_mw) g.noise_mw = *c.noise_mw;
  if (c.tx_power_mw) g.tx_power_mw = *c.tx_power_mw;
  if (c.user_spacing || c.user_offset) {
    const double spacing = c.user_spacing.value_or(5.0);
    const double offset = c.user_offset.value_or(2.0);
    for (int k = 0; k < c.users; ++k) {
      const double x = g.irs_position.x() + spacing * (k - 0.5 * (c.users - 1));
      g.user_positions[static_cast<size_t>(k)] = Eigen::Vector2d(x, offset);
    }
  }
  g.validate();
  return g;
}

OffloadEconomy make_economy(const ExperimentConfig& c, double rate_floor) {
  if (rate_floor < 0.0) throw std::invalid_argument("config: rate floor must be non-negative");
  const std::vector<TaskProfile> tasks =
      c.tasks.empty() ? std::vector<TaskProfile>(static_cast<size_t>(c.users)) : c.tasks;
  OffloadEconomy e = derive_economy(tasks, RVector::Constant(c.users, rate_floor));
  if (c.cost_scale) e.transmit_cost_scale = *c.cost_scale;
  if (c.edge_advantage) e.edge_advantage = *c.edge_advantage;
  return e;
}

std::vector<double> sweep_floors(const ExperimentConfig& c) {
  std::vector<double> floors;
  for (int i = 0;; ++i) {
    const double f = c.rate_min + i * c.rate_step;
    if (f > c.rate_max + 1e-6 * c.rate_step) break;
    floors.push_back(f);
  }
  return floors;
}

}  // namespace irsmec
