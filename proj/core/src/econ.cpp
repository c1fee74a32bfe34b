#include "irsmec/econ.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace irsmec {

void TaskProfile::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("task: ") + name + " must be positive");
  };
  auto non_negative = [](double v, const char* name) {
    if (v < 0.0) throw std::invalid_argument(std::string("task: ") + name + " must be non-negative");
  };
  non_negative(data_bits, "data_bits");
  positive(local_rate_cps, "local_rate_cps");
  positive(edge_rate_cps, "edge_rate_cps");
  non_negative(cpu_cycles, "cpu_cycles");
  non_negative(energy_per_cycle_j, "energy_per_cycle_j");
  non_negative(tx_power_w, "tx_power_w");
  non_negative(tail_energy_j, "tail_energy_j");
  non_negative(time_weight, "time_weight");
  non_negative(energy_weight, "energy_weight");
}

double local_utility(const TaskProfile& t) {
  return t.task_benefit - t.time_weight * t.cpu_cycles / t.local_rate_cps -
         t.energy_weight * t.energy_per_cycle_j * t.cpu_cycles;
}

double edge_utility(const TaskProfile& t, double rate, double payment) {
  if (!(rate > 0.0)) throw std::domain_error("econ: edge utility needs a positive rate");
  const double tx_time = t.data_bits / rate;
  return t.task_benefit - t.time_weight * (tx_time + t.cpu_cycles / t.edge_rate_cps) -
         t.energy_weight * (t.tx_power_w * tx_time + t.tail_energy_j) - payment;
}

OffloadEconomy derive_economy(const std::vector<TaskProfile>& tasks, const RVector& floors) {
  const int k = static_cast<int>(tasks.size());
  if (k == 0) throw std::invalid_argument("econ: no task profiles");
  if (floors.size() != k)
    throw std::invalid_argument("econ: rate floor count mismatches task profiles");
  OffloadEconomy e;
  e.edge_advantage.resize(k);
  e.transmit_cost_scale.resize(k);
  e.rate_floor = floors;
  for (int i = 0; i < k; ++i) {
    const TaskProfile& t = tasks[static_cast<size_t>(i)];
    t.validate();
    if (floors(i) < 0.0) throw std::invalid_argument("econ: rate floors must be non-negative");
    e.edge_advantage(i) = t.time_weight * t.cpu_cycles / t.local_rate_cps +
                          t.energy_weight * t.energy_per_cycle_j * t.cpu_cycles -
                          t.time_weight * t.cpu_cycles / t.edge_rate_cps -
                          t.energy_weight * t.tail_energy_j;
    e.transmit_cost_scale(i) = (t.time_weight + t.energy_weight * t.tx_power_w) * t.data_bits;
  }
  return e;
}

double payment_bound(const OffloadEconomy& e, int k, double rate) {
  if (k < 0 || k >= e.edge_advantage.size())
    throw std::invalid_argument("econ: user index out of range");
  const double a = e.transmit_cost_scale(k);
  if (a == 0.0) return e.edge_advantage(k);
  if (rate <= 0.0) return -std::numeric_limits<double>::infinity();
  return e.edge_advantage(k) - a / rate;
}

bool offload_decision(const OffloadEconomy& e, int k, double rate, double payment) {
  return payment <= payment_bound(e, k, rate);
}

double server_earning_p1(const OffloadEconomy& e, const RVector& rates) {
  if (rates.size() != e.edge_advantage.size())
    throw std::invalid_argument("econ: rate count mismatches economy");
  double total = 0.0;
  for (int k = 0; k < rates.size(); ++k) {
    const double bound = payment_bound(e, k, rates(k));
    if (bound > 0.0) total += bound;
  }
  return total;
}

double server_earning_p2(const OffloadEconomy& e, const RVector& rates) {
  if (rates.size() != e.edge_advantage.size())
    throw std::invalid_argument("econ: rate count mismatches economy");
  double total = 0.0;
  for (int k = 0; k < rates.size(); ++k) {
    if (!(rates(k) > 0.0)) throw std::domain_error("econ: earning needs positive rates");
    total += e.edge_advantage(k) - e.transmit_cost_scale(k) / rates(k);
  }
  return total;
}

double transmit_cost_objective(const OffloadEconomy& e, const RVector& rates) {
  if (rates.size() != e.edge_advantage.size())
    throw std::invalid_argument("econ: rate count mismatches economy");
  double total = 0.0;
  for (int k = 0; k < rates.size(); ++k) {
    if (!(rates(k) > 0.0)) throw std::domain_error("econ: objective needs positive rates");
    total += e.transmit_cost_scale(k) / rates(k);
  }
  return total;
}

}  // namespace irsmec
