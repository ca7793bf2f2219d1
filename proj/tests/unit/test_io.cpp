#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "s2d/io.hpp"
#include "s2d/synthetic.hpp"

using namespace s2d;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("16-bit PNG round trip is exact") {
    testing::ScratchDir dir("png16");
    Image<std::uint16_t> raw(7, 5, 0);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint16_t>(i * 1871 % 65536);
    raw[3] = 65535;
    write_png16(dir.path() / "a.png", raw);
    const Image<std::uint16_t> back = read_png16(dir.path() / "a.png");
    REQUIRE(back.width() == 7);
    REQUIRE(back.height() == 5);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(back[i] == raw[i]);
  }

  TEST_CASE("depth quantization uses 5000 counts per metre") {
    DepthImage d(4, 1);
    d.set(0, 1.0);
    d.set(1, 0.00005);  // rounds to zero counts
    d.set(2, 20.0);     // beyond the 16-bit range
    const Image<std::uint16_t> q = quantize_depth(d);
    CHECK(q[0] == 5000);
    CHECK(q[1] == 0);
    CHECK(q[2] == 0);
    CHECK(q[3] == 0);
    const DepthImage back = dequantize_depth(q);
    CHECK(back.valid(0));
    CHECK(back[0] == 1.0);
    CHECK_FALSE(back.valid(1));
    CHECK_FALSE(back.valid(2));
    CHECK_FALSE(back.valid(3));
    CHECK_THROWS_AS(quantize_depth(d, 0.0), InvalidInput);
  }

  TEST_CASE("depth PNG is idempotent after one quantization") {
    testing::ScratchDir dir("depthpng");
    DepthImage d(9, 6);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (i % 5 != 0) d.set(i, 0.3 + 0.0137 * double(i));
    write_depth_png(dir.path() / "d.png", d);
    const DepthImage once = read_depth_png(dir.path() / "d.png");
    CHECK(once == dequantize_depth(quantize_depth(d)));
    write_depth_png(dir.path() / "d.png", once);
    CHECK(read_depth_png(dir.path() / "d.png") == once);
  }

  TEST_CASE("color PNG round trip") {
    testing::ScratchDir dir("color");
    ColorImage c(3, 2);
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = Rgb{std::uint8_t(40 * i), std::uint8_t(255 - 30 * i), std::uint8_t(7 * i)};
    write_color_png(dir.path() / "c.png", c);
    const ColorImage back = read_color_png(dir.path() / "c.png");
    REQUIRE(back.same_shape(c));
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(back[i].r == c[i].r);
      CHECK(back[i].g == c[i].g);
      CHECK(back[i].b == c[i].b);
    }
  }

  TEST_CASE("reading a missing or corrupt PNG is an input error") {
    testing::ScratchDir dir("badpng");
    CHECK_THROWS_AS(read_png16(dir.path() / "none.png"), InvalidInput);
    write_text_file(dir.path() / "junk.png", "not a png");
    CHECK_THROWS_AS(read_png16(dir.path() / "junk.png"), InvalidInput);
  }

  TEST_CASE("PLY header and vertices") {
    const CameraIntrinsics k{2.0, 2.0, 1.0, 1.0, 3, 3};
    DepthImage d(3, 3);
    d.set(1, 1, 1.0);
    d.set(2, 2, 2.0);
    const ColorImage c(3, 3, Rgb{10, 20, 30});
    std::ostringstream out;
    write_ply(out, d, c, k, Pose::identity());
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 12);
    CHECK(lines[0] == "ply");
    CHECK(lines[1] == "format ascii 1.0");
    CHECK(lines[2] == "element vertex 2");
    CHECK(lines[9] == "end_header");
    CHECK(lines[10] == "0.000000 0.000000 1.000000 10 20 30");
    CHECK(lines[11] == "1.000000 1.000000 2.000000 10 20 30");

    std::ostringstream moved;
    write_ply(moved, d, c, k, Pose{Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0)});
    CHECK(lines_of(moved.str())[10] == "1.000000 0.000000 1.000000 10 20 30");

    std::ostringstream empty;
    write_ply(empty, DepthImage(3, 3), c, k, Pose::identity());
    CHECK(lines_of(empty.str())[2] == "element vertex 0");
    CHECK(lines_of(empty.str()).size() == 10);

    CHECK_THROWS_AS(write_ply(out, DepthImage(2, 3), c, k, Pose::identity()), InvalidInput);
  }

  TEST_CASE("trajectory text round trip") {
    std::istringstream in(
        "# comment\n"
        "1.0 0 0 0 0 0 0 1\n"
        "\n"
        "1.5 1 2 3 0 0 0.7071067811865476 0.7071067811865476\n");
    const Trajectory t = read_trajectory(in);
    REQUIRE(t.size() == 2);
    CHECK(t.poses()[0].pose.R.isIdentity(1e-15));
    CHECK(t.poses()[1].pose.t.isApprox(Eigen::Vector3d(1, 2, 3)));
    CHECK((t.poses()[1].pose.R * Eigen::Vector3d::UnitX()).isApprox(Eigen::Vector3d::UnitY(), 1e-12));

    std::ostringstream out;
    write_trajectory(out, t);
    std::istringstream again(out.str());
    const Trajectory u = read_trajectory(again);
    REQUIRE(u.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(u.poses()[i].timestamp == t.poses()[i].timestamp);
      CHECK(u.poses()[i].pose.R.isApprox(t.poses()[i].pose.R, 1e-12));
      CHECK(u.poses()[i].pose.t == t.poses()[i].pose.t);
    }
  }

  TEST_CASE("trajectory errors report the line") {
    std::istringstream bad_quat("1.0 0 0 0 0 0 0 1\n# c\n2.0 0 0 0 0 0 0 2\n");
    try {
      read_trajectory(bad_quat, "gt.txt");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("gt.txt:3") != std::string::npos);
    }
    std::istringstream short_line("1.0 0 0 0 0 0 1\n");
    CHECK_THROWS_AS(read_trajectory(short_line), ParseError);
    std::istringstream trailing("1.0 0 0 0 0 0 0 1 9\n");
    CHECK_THROWS_AS(read_trajectory(trailing), ParseError);
    std::istringstream backwards("2.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 0 1\n");
    CHECK_THROWS_AS(read_trajectory(backwards), ParseError);
  }

  TEST_CASE("points and window poses round trip") {
    const std::vector<MaturePoint> points = {{0, 10.5, 20.25, 1.75, 0.5}, {2, 3, 4, 0.125, 0}};
    std::ostringstream pout;
    write_points(pout, points);
    std::istringstream pin(pout.str());
    const auto p = read_points(pin);
    REQUIRE(p.size() == 2);
    CHECK(p[1].host == 2);
    CHECK(p[0].u == 10.5);
    CHECK(p[0].v == 20.25);
    CHECK(p[0].z == 1.75);
    CHECK(p[0].baseline == 0.5);

    WindowKeyframe kf;
    kf.id = 2;
    kf.host_to_new = Pose{Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 1, 0).normalized()).toRotationMatrix(),
                          Eigen::Vector3d(0.1, -0.2, 0.05)};
    std::ostringstream kout;
    write_window_poses(kout, {kf});
    std::istringstream kin(kout.str());
    const auto k = read_window_poses(kin);
    REQUIRE(k.size() == 1);
    CHECK(k[0].id == 2);
    CHECK(k[0].host_to_new.R == kf.host_to_new.R);
    CHECK(k[0].host_to_new.t == kf.host_to_new.t);

    std::istringstream negative("0 1 1 -1 0.5\n");
    CHECK_THROWS_AS(read_points(negative), ParseError);
    std::istringstream fractional_host("0.5 1 1 1 0.5\n");
    CHECK_THROWS_AS(read_points(fractional_host), ParseError);
    std::istringstream not_rotation("0 2 0 0 0 0 1 0 0 0 0 1 0\n");
    CHECK_THROWS_AS(read_window_poses(not_rotation), ParseError);
  }

  TEST_CASE("TUM sequence loading") {
    testing::ScratchDir dir("tum");
    CHECK_THROWS_AS(load_tum_sequence(dir.path() / "missing"), InvalidInput);
    CHECK_THROWS_AS(load_tum_sequence(dir.path()), InvalidInput);

    DepthImage d(4, 3);
    d.set(0, 1.0);
    d.set(5, 0.5);
    const ColorImage c(4, 3, Rgb{1, 2, 3});
    const Trajectory gt({{1.0, Pose::identity()}, {1.1, Pose::identity()}});
    write_tum_sequence(dir.path(), {1.0, 1.1}, {{c, d}, {c, d}}, gt);

    const TumSequence seq = load_tum_sequence(dir.path());
    REQUIRE(seq.frames.size() == 2);
    CHECK(seq.groundtruth.size() == 2);
    CHECK(seq.frames[1].timestamp == doctest::Approx(1.1));
    const TumImages images = load_tum_frame(seq.frames[0]);
    CHECK(images.depth.valid(0));
    CHECK(images.depth[0] == 1.0);
    CHECK(images.depth[5] == 0.5);
    CHECK_FALSE(images.depth.valid(1));
    CHECK(images.color[7].g == 2);

    // Depth stamps further than the association window from every rgb stamp are dropped.
    write_text_file(dir.path() / "depth.txt", "1.5 depth/1.000000.png\n");
    CHECK(load_tum_sequence(dir.path()).frames.empty());
    write_text_file(dir.path() / "depth.txt", "1.0 depth/nothere.png\n");
    CHECK_THROWS_AS(load_tum_sequence(dir.path()), ParseError);
  }

  TEST_CASE("text files") {
    testing::ScratchDir dir("text");
    write_text_file(dir.path() / "a.txt", "hello\n");
    CHECK(read_text_file(dir.path() / "a.txt") == "hello\n");
    CHECK_THROWS_AS(read_text_file(dir.path() / "b.txt"), InvalidInput);
  }
}
