#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "irsmec/channel.hpp"
#include "irsmec/geometry.hpp"

using namespace irsmec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "irsmec_chanmodel_tests";
  fs::create_directories(dir);
  return dir / name;
}

bool identical(const ChannelSet& a, const ChannelSet& b) {
  if (a.irs_to_ap.rows() != b.irs_to_ap.rows() || a.irs_to_ap.cols() != b.irs_to_ap.cols())
    return false;
  if (a.irs_to_ap != b.irs_to_ap) return false;
  if (a.user_to_irs.size() != b.user_to_irs.size()) return false;
  for (size_t i = 0; i < a.user_to_irs.size(); ++i)
    if (a.user_to_irs[i] != b.user_to_irs[i]) return false;
  if (a.user_to_ap.size() != b.user_to_ap.size()) return false;
  for (size_t i = 0; i < a.user_to_ap.size(); ++i)
    if (a.user_to_ap[i] != b.user_to_ap[i]) return false;
  return a.tx_power_mw == b.tx_power_mw && a.noise_mw == b.noise_mw;
}

}  // namespace

TEST_CASE("default geometry dimensions") {
  const SystemGeometry g = default_geometry(4, 4, 30);
  const ChannelSet ch = generate_channels(g, 1);
  CHECK(ch.ap_antennas() == 4);
  CHECK(ch.users() == 4);
  CHECK(ch.irs_elements() == 30);
  CHECK(ch.irs_to_ap.rows() == 4);
  CHECK(ch.irs_to_ap.cols() == 30);
  for (const auto& hr : ch.user_to_irs) CHECK(hr.size() == 30);
  for (const auto& hd : ch.user_to_ap) CHECK(hd.size() == 4);
  CHECK((ch.tx_power_mw.array() > 0.0).all());
  CHECK(ch.noise_mw > 0.0);
  ch.validate();
}

TEST_CASE("no-IRS degenerate case") {
  const ChannelSet ch = generate_channels(default_geometry(4, 4, 0), 7);
  CHECK(ch.irs_elements() == 0);
  CHECK(ch.irs_to_ap.cols() == 0);
  for (const auto& hr : ch.user_to_irs) CHECK(hr.size() == 0);
  for (const auto& hd : ch.user_to_ap) CHECK(hd.norm() > 0.0);
  ch.validate();
}

TEST_CASE("determinism under a fixed seed") {
  const SystemGeometry g = default_geometry(3, 2, 8);
  CHECK(identical(generate_channels(g, 42), generate_channels(g, 42)));
  CHECK_FALSE(identical(generate_channels(g, 42), generate_channels(g, 43)));
}

TEST_CASE("line-of-sight channel has numerical rank one") {
  const ChannelSet ch = generate_channels(default_geometry(4, 4, 30), 3);
  const Eigen::JacobiSVD<CMatrix> svd(ch.irs_to_ap);
  const auto& s = svd.singularValues();
  REQUIRE(s.size() >= 2);
  CHECK(s(1) < 1e-10 * s(0));
}

TEST_CASE("save and load round-trip bit-exactly") {
  const auto path = temp_file("roundtrip.txt");
  for (int n : {30, 0}) {
    const ChannelSet ch = generate_channels(default_geometry(4, 4, n), 11);
    save_channels(ch, path);
    CHECK(identical(ch, load_channels(path)));
    // Idempotent bytes: a second save writes the identical file.
    std::ifstream in(path, std::ios::binary);
    const std::string once((std::istreambuf_iterator<char>(in)), {});
    save_channels(ch, path);
    std::ifstream in2(path, std::ios::binary);
    const std::string twice((std::istreambuf_iterator<char>(in2)), {});
    CHECK(once == twice);
  }
  fs::remove(path);
}

TEST_CASE("truncated file fails with a located error") {
  const auto path = temp_file("truncated.txt");
  save_channels(generate_channels(default_geometry(2, 2, 4), 5), path);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  in.close();
  bytes.resize(bytes.size() / 2);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  out.close();
  CHECK_THROWS_WITH_AS(load_channels(path), doctest::Contains("line"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("pathloss scaling law") {
  // Two devices at distances d and 2d from the AP: the link gain ratio is
  // exactly 2^exponent, and empirical channel energy follows it.
  SystemGeometry g = default_geometry(4, 2, 0);
  g.user_positions[0] = Eigen::Vector2d(10.0, 0.0);
  g.user_positions[1] = Eigen::Vector2d(20.0, 0.0);
  g.validate();
  CHECK(user_ap_link_gain(g, 0) / user_ap_link_gain(g, 1) ==
        doctest::Approx(std::pow(2.0, g.pathloss_exponent_user)).epsilon(1e-12));

  double e_near = 0.0;
  double e_far = 0.0;
  const int seeds = 2500;  // 4 antennas x 2500 seeds = 1e4 samples per device
  for (int s = 0; s < seeds; ++s) {
    const ChannelSet ch = generate_channels(g, 1000 + static_cast<std::uint64_t>(s));
    e_near += ch.user_to_ap[0].squaredNorm();
    e_far += ch.user_to_ap[1].squaredNorm();
  }
  e_near /= 4.0 * seeds;
  e_far /= 4.0 * seeds;
  CHECK(e_near / user_ap_link_gain(g, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(e_far / user_ap_link_gain(g, 1) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(e_far / e_near == doctest::Approx(std::pow(2.0, -g.pathloss_exponent_user)).epsilon(0.1));
}

TEST_CASE("surface-link budget matches empirical variance") {
  SystemGeometry g = default_geometry(2, 1, 4);
  double acc = 0.0;
  const int seeds = 2500;  // 4 elements x 2500 seeds = 1e4 samples
  for (int s = 0; s < seeds; ++s)
    acc += generate_channels(g, 50000 + static_cast<std::uint64_t>(s)).user_to_irs[0].squaredNorm();
  acc /= 4.0 * seeds;
  CHECK(acc / user_irs_link_gain(g, 0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("geometry and channel validation reject malformed input") {
  SystemGeometry g = default_geometry(4, 4, 30);
  g.users = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = default_geometry(4, 4, 30);
  g.user_positions[2] = g.ap_position;  // zero-length link
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  ChannelSet ch = generate_channels(default_geometry(2, 2, 3), 1);
  ch.tx_power_mw(1) = 0.0;
  CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
  ch = generate_channels(default_geometry(2, 2, 3), 1);
  ch.user_to_irs.pop_back();
  CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
}

TEST_CASE("default geometry carries the calibrated penetration loss") {
  const SystemGeometry g = default_geometry(4, 4, 30);
  CHECK(g.penetration_loss_db == calibrated_penetration_loss_db());
  CHECK(g.ap_irs_distance() == doctest::Approx(50.0));
}
