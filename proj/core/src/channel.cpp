#include "irsmec/channel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace irsmec {

namespace {

double db_to_linear(double db) { return std::pow(10.0, -db / 10.0); }

double link_angle(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  const Eigen::Vector2d d = to - from;
  return std::atan2(d.y(), d.x());
}

/// Uniform linear array steering vector, half-wavelength spacing.
CVector steering(int size, double angle) {
  CVector a(size);
  const double step = std::numbers::pi * std::sin(angle);
  for (int i = 0; i < size; ++i) {
    a(i) = std::polar(1.0, step * i);
  }
  return a;
}

}  // namespace

void ChannelSet::validate() const {
  const int m = ap_antennas();
  const int n = irs_elements();
  const int k = users();
  if (m <= 0) throw std::invalid_argument("channels: no AP antennas");
  if (k <= 0) throw std::invalid_argument("channels: no users");
  if (static_cast<int>(user_to_irs.size()) != k)
    throw std::invalid_argument("channels: user_to_irs count mismatches users");
  if (tx_power_mw.size() != k)
    throw std::invalid_argument("channels: tx_power_mw count mismatches users");
  for (int i = 0; i < k; ++i) {
    if (user_to_irs[static_cast<size_t>(i)].size() != n)
      throw std::invalid_argument("channels: user_to_irs[" + std::to_string(i) +
                                  "] length mismatches irs_elements");
    if (user_to_ap[static_cast<size_t>(i)].size() != m)
      throw std::invalid_argument("channels: user_to_ap[" + std::to_string(i) +
                                  "] length mismatches ap_antennas");
    if (!(tx_power_mw(i) > 0.0))
      throw std::invalid_argument("channels: tx_power_mw[" + std::to_string(i) +
                                  "] must be positive");
  }
  if (!(noise_mw > 0.0)) throw std::invalid_argument("channels: noise_mw must be positive");
}

double user_ap_link_gain(const SystemGeometry& g, int k) {
  const double db = g.ref_pathloss_db_at_1m +
                    10.0 * g.pathloss_exponent_user * std::log10(g.user_ap_distance(k)) +
                    g.penetration_loss_db - g.antenna_gain_user_db - g.antenna_gain_ap_db;
  return db_to_linear(db);
}

double user_irs_link_gain(const SystemGeometry& g, int k) {
  // The per-element gain is credited once in the cascade, on this hop.
  const double db = g.ref_pathloss_db_at_1m +
                    10.0 * g.pathloss_exponent_user * std::log10(g.user_irs_distance(k)) +
                    g.penetration_loss_db - g.antenna_gain_user_db -
                    g.antenna_gain_irs_element_db;
  return db_to_linear(db);
}

double ap_irs_link_gain(const SystemGeometry& g) {
  const double db = g.ref_pathloss_db_at_1m +
                    10.0 * g.pathloss_exponent_ap_irs * std::log10(g.ap_irs_distance()) -
                    g.antenna_gain_ap_db;
  return db_to_linear(db);
}

ChannelSet generate_channels(const SystemGeometry& g, std::uint64_t seed) {
  g.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  auto cnormal = [&](double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = unit_normal(rng) * s;
    const double im = unit_normal(rng) * s;
    return Complex(re, im);
  };

  ChannelSet ch;
  ch.noise_mw = g.noise_mw;
  ch.tx_power_mw = RVector::Constant(g.users, g.tx_power_mw);

  const double los_amp = std::sqrt(ap_irs_link_gain(g));
  const CVector a_ap = steering(g.ap_antennas, link_angle(g.ap_position, g.irs_position));
  const CVector a_irs = steering(g.irs_elements, link_angle(g.irs_position, g.ap_position));
  ch.irs_to_ap = los_amp * a_ap * a_irs.adjoint();

  ch.user_to_irs.reserve(static_cast<size_t>(g.users));
  ch.user_to_ap.reserve(static_cast<size_t>(g.users));
  for (int k = 0; k < g.users; ++k) {
    const double var_irs = user_irs_link_gain(g, k);
    const double var_ap = user_ap_link_gain(g, k);
    CVector hr(g.irs_elements);
    for (int n = 0; n < g.irs_elements; ++n) hr(n) = cnormal(var_irs);
    CVector hd(g.ap_antennas);
    for (int m = 0; m < g.ap_antennas; ++m) hd(m) = cnormal(var_ap);
    ch.user_to_irs.push_back(std::move(hr));
    ch.user_to_ap.push_back(std::move(hd));
  }
  return ch;
}

namespace {

constexpr const char* kMagic = "irsmec-channels v1";

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("channel file: number formatting failed");
  return std::string(buf, ptr);
}

class FieldReader {
 public:
  FieldReader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("channel file '" + path_.string() + "' line " +
                             std::to_string(line_no_) + ": " + what);
  }

  std::string next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    fail("unexpected end of file");
  }

  /// Reads a line of the form "<name> tok tok ..." and returns the tokens.
  std::vector<std::string> named(const std::string& name, int expect_tokens = -1) {
    std::istringstream ss(next_line());
    std::string head;
    ss >> head;
    if (head != name) fail("expected field '" + name + "', found '" + head + "'");
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (expect_tokens >= 0 && static_cast<int>(toks.size()) != expect_tokens)
      fail("field '" + name + "' expects " + std::to_string(expect_tokens) +
           " value(s), found " + std::to_string(toks.size()));
    return toks;
  }

  double parse_double(const std::string& tok, const std::string& field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      fail("field '" + field + "': cannot parse number '" + tok + "'");
    return v;
  }

  int parse_int(const std::string& tok, const std::string& field) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      fail("field '" + field + "': cannot parse integer '" + tok + "'");
    return v;
  }

  Complex entry(const std::string& field) {
    std::istringstream ss(next_line());
    std::string re, im, extra;
    if (!(ss >> re >> im) || (ss >> extra))
      fail("field '" + field + "': expected 're im' pair");
    return {parse_double(re, field), parse_double(im, field)};
  }

 private:
  std::istream& in_;
  std::filesystem::path path_;
  int line_no_ = 0;
};

}  // namespace

void save_channels(const ChannelSet& ch, const std::filesystem::path& path) {
  ch.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("channel file '" + path.string() + "': cannot open for writing");
  const int m = ch.ap_antennas();
  const int n = ch.irs_elements();
  const int k = ch.users();
  out << kMagic << "\n";
  out << "ap_antennas " << m << "\n";
  out << "users " << k << "\n";
  out << "irs_elements " << n << "\n";
  out << "noise_mw " << format_double(ch.noise_mw) << "\n";
  out << "tx_power_mw";
  for (int i = 0; i < k; ++i) out << ' ' << format_double(ch.tx_power_mw(i));
  out << "\n";
  auto put = [&](Complex v) {
    out << format_double(v.real()) << ' ' << format_double(v.imag()) << "\n";
  };
  out << "matrix irs_to_ap " << m << ' ' << n << "\n";
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) put(ch.irs_to_ap(r, c));
  for (int i = 0; i < k; ++i) {
    out << "vector user_to_irs " << i << ' ' << n << "\n";
    for (int c = 0; c < n; ++c) put(ch.user_to_irs[static_cast<size_t>(i)](c));
    out << "vector user_to_ap " << i << ' ' << m << "\n";
    for (int r = 0; r < m; ++r) put(ch.user_to_ap[static_cast<size_t>(i)](r));
  }
  out << "end\n";
  if (!out) throw std::runtime_error("channel file '" + path.string() + "': write failed");
}

ChannelSet load_channels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("channel file '" + path.string() + "': cannot open");
  FieldReader r(in, path);

  if (r.next_line() != kMagic) r.fail(std::string("expected header '") + kMagic + "'");
  ChannelSet ch;
  const int m = r.parse_int(r.named("ap_antennas", 1)[0], "ap_antennas");
  const int k = r.parse_int(r.named("users", 1)[0], "users");
  const int n = r.parse_int(r.named("irs_elements", 1)[0], "irs_elements");
  if (m <= 0) r.fail("field 'ap_antennas' must be positive");
  if (k <= 0) r.fail("field 'users' must be positive");
  if (n < 0) r.fail("field 'irs_elements' must be non-negative");
  ch.noise_mw = r.parse_double(r.named("noise_mw", 1)[0], "noise_mw");
  const auto powers = r.named("tx_power_mw", k);
  ch.tx_power_mw.resize(k);
  for (int i = 0; i < k; ++i) ch.tx_power_mw(i) = r.parse_double(powers[static_cast<size_t>(i)], "tx_power_mw");

  auto expect_dims = [&](const std::vector<std::string>& toks, const std::string& field,
                         int want_index, int want_len) {
    if (r.parse_int(toks[0], field) != want_index)
      r.fail("field '" + field + "': expected index " + std::to_string(want_index));
    if (r.parse_int(toks[1], field) != want_len)
      r.fail("field '" + field + "': expected length " + std::to_string(want_len));
  };

  {
    const auto dims = r.named("matrix", 3);
    if (dims[0] != "irs_to_ap") r.fail("expected matrix 'irs_to_ap', found '" + dims[0] + "'");
    if (r.parse_int(dims[1], "irs_to_ap") != m || r.parse_int(dims[2], "irs_to_ap") != n)
      r.fail("field 'irs_to_ap': dimensions mismatch header");
    ch.irs_to_ap.resize(m, n);
    for (int rr = 0; rr < m; ++rr)
      for (int cc = 0; cc < n; ++cc) ch.irs_to_ap(rr, cc) = r.entry("irs_to_ap");
  }
  ch.user_to_irs.reserve(static_cast<size_t>(k));
  ch.user_to_ap.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto head = r.named("vector", 3);
    if (head[0] != "user_to_irs") r.fail("expected vector 'user_to_irs', found '" + head[0] + "'");
    expect_dims({head[1], head[2]}, "user_to_irs", i, n);
    CVector hr(n);
    for (int c = 0; c < n; ++c) hr(c) = r.entry("user_to_irs");
    ch.user_to_irs.push_back(std::move(hr));

    head = r.named("vector", 3);
    if (head[0] != "user_to_ap") r.fail("expected vector 'user_to_ap', found '" + head[0] + "'");
    expect_dims({head[1], head[2]}, "user_to_ap", i, m);
    CVector hd(m);
    for (int rr = 0; rr < m; ++rr) hd(rr) = r.entry("user_to_ap");
    ch.user_to_ap.push_back(std::move(hd));
  }
  if (r.next_line() != "end") r.fail("expected trailer 'end'");
  ch.validate();
  return ch;
}

}  // namespace irsmec
