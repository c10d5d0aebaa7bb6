// Copyright 2026 The ingrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "ingrasp/se3.hpp"
#include "support/oracles.hpp"

using namespace ingrasp;

namespace {

double mat_err(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("exp_so3 matches the power series") {
  const Eigen::Vector3d r(0.3, 0.0, 0.0);
  const Eigen::Matrix3d R = exp_so3(RotVec(r));
  CHECK(mat_err(R, testing::series_exp_so3(r, 20)) < 1e-12);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d v = testing::random_rotvec(rng, 3.1);
    CHECK(mat_err(exp_so3(RotVec(v)), testing::series_exp_so3(v)) < 1e-12);
  }
}

TEST_CASE("exp_so3 near zero stays a rotation") {
  for (double theta : {0.0, 1e-12, 1e-9, 1e-8, 1e-6}) {
    const Eigen::Matrix3d R = exp_so3(RotVec(theta, 0.0, 0.0));
    CHECK(mat_err(R * R.transpose(), Eigen::Matrix3d::Identity()) < 1e-14);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log_so3 round trip over random rotations") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    // Stay away from the theta == pi boundary where the principal value
    // legitimately flips axis sign.
    const Eigen::Vector3d v = testing::random_rotvec(rng, 3.13);
    const Eigen::Matrix3d R = exp_so3(RotVec(v));
    const Eigen::Matrix3d R2 = exp_so3(log_so3(R));
    CHECK((R - R2).norm() < 1e-10);
  }
}

TEST_CASE("log_so3 recovers the vector, not just the rotation") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d v = testing::random_rotvec(rng, 3.0);
    const RotVec r = log_so3(exp_so3(RotVec(v)));
    CHECK((r.v - v).norm() < 1e-10);
  }
}

TEST_CASE("log_so3 near pi") {
  const double theta = 3.14159265358979323846 - 1e-4;
  const Eigen::Matrix3d R = testing::series_exp_so3({theta, 0.0, 0.0});
  const RotVec r = log_so3(R);
  CHECK(r.angle() == doctest::Approx(theta).epsilon(1e-10));
  CHECK(r.v.x() == doctest::Approx(theta).epsilon(1e-10));
  CHECK(std::abs(r.v.y()) < 1e-9);
  CHECK(std::abs(r.v.z()) < 1e-9);

  // Exactly pi: axis sign pinned by the largest-magnitude component.
  const Eigen::Vector3d axis = Eigen::Vector3d(-1.0, 0.5, 0.2).normalized();
  const Eigen::Matrix3d Rpi =
      testing::series_exp_so3(3.14159265358979323846 * axis);
  const RotVec rpi = log_so3(Rpi);
  CHECK(rpi.angle() == doctest::Approx(3.14159265358979323846).epsilon(1e-9));
  CHECK(rpi.v.x() > 0.0);
  CHECK(mat_err(exp_so3(rpi), Rpi) < 1e-9);
}

TEST_CASE("log_so3 rejects non-rotations") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = 1.001;
  CHECK_THROWS_AS(log_so3(bad), NonOrthonormalInputError);

  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(log_so3(reflect), NonOrthonormalInputError);
}

TEST_CASE("left_jacobian matches its finite-difference definition") {
  std::mt19937_64 rng(17);
  const double h = 1e-7;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d r = testing::random_rotvec(rng, 3.0);
    const Eigen::Matrix3d J = left_jacobian(RotVec(r));
    const Eigen::Matrix3d Rinv = exp_so3(RotVec(r)).transpose();
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d dr = Eigen::Vector3d::Zero();
      dr[k] = h;
      const Eigen::Vector3d col =
          log_so3(exp_so3(RotVec(r + dr)) * Rinv).v / h;
      CHECK((J.col(k) - col).norm() < 1e-6);
    }
  }
}

TEST_CASE("left_jacobian closed form at 0.5 along x") {
  const RotVec r(0.5, 0.0, 0.0);
  const double theta = 0.5;
  const Eigen::Vector3d a(1.0, 0.0, 0.0);
  const Eigen::Matrix3d expected =
      std::sin(theta) / theta * Eigen::Matrix3d::Identity() +
      (1.0 - std::sin(theta) / theta) * a * a.transpose() +
      (1.0 - std::cos(theta)) / theta * skew(a);
  CHECK(mat_err(left_jacobian(r), expected) < 1e-14);
}

TEST_CASE("left_jacobian_inv is the matrix inverse") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    const RotVec r(testing::random_rotvec(rng, 3.14));
    const Eigen::Matrix3d JJinv = left_jacobian(r) * left_jacobian_inv(r);
    CHECK(mat_err(JJinv, Eigen::Matrix3d::Identity()) < 1e-10);
  }
  // Fixed spot check against explicit inversion.
  const RotVec r(0.3, -0.8, 1.1);
  CHECK(mat_err(left_jacobian_inv(r), left_jacobian(r).inverse()) < 1e-12);
}

TEST_CASE("left jacobians across the series switch") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double theta : {1e-9, 1e-7, 1e-5, 5e-4, 9.9e-4, 1.01e-3, 1e-2}) {
    Eigen::Vector3d a(gauss(rng), gauss(rng), gauss(rng));
    a.normalize();
    const RotVec r(theta * a);
    CHECK(mat_err(left_jacobian(r) * left_jacobian_inv(r),
                  Eigen::Matrix3d::Identity()) < 1e-12);
    // The FD definition still holds in the small-angle branch.
    const Eigen::Matrix3d Rinv = exp_so3(r).transpose();
    const double h = 1e-7;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d dr = Eigen::Vector3d::Zero();
      dr[k] = h;
      const Eigen::Vector3d col =
          log_so3(exp_so3(RotVec(r.v + dr)) * Rinv).v / h;
      CHECK((left_jacobian(r).col(k) - col).norm() < 1e-6);
    }
  }
}

TEST_CASE("r' J_l_inv(r) == r'") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d r = testing::random_rotvec(rng, 3.1);
    const Eigen::RowVector3d lhs = r.transpose() * left_jacobian_inv(RotVec(r));
    CHECK((lhs - r.transpose()).norm() < 1e-10);
  }
}

TEST_CASE("first-order composition: log(exp(phi) exp(r)) ~ Jinv(r) phi + r") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d r = testing::random_rotvec(rng, 3.0);
    Eigen::Vector3d phi(gauss(rng), gauss(rng), gauss(rng));
    phi = 1e-5 * phi.normalized();
    const Eigen::Vector3d lhs =
        log_so3(exp_so3(RotVec(phi)) * exp_so3(RotVec(r))).v;
    const Eigen::Vector3d rhs = left_jacobian_inv(RotVec(r)) * phi + r;
    CHECK((lhs - rhs).norm() < 1e-8);
  }
}

TEST_CASE("RotVec canonicalization") {
  const RotVec r(4.0, 0.0, 0.0);
  const RotVec c = r.canonical();
  CHECK(c.angle() <= 3.14159265358979323846);
  CHECK(mat_err(exp_so3(r), exp_so3(c)) < 1e-12);
  const RotVec small(0.3, 0.2, 0.1);
  CHECK((small.canonical().v - small.v).norm() == 0.0);
}

TEST_CASE("pose compose, inverse, act") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i) {
    const Pose a = testing::random_pose(rng);
    const Pose b = testing::random_pose(rng);
    const Eigen::Vector3d x(0.1, -0.2, 0.3);
    const Eigen::Vector3d direct = a.act(b.act(x));
    const Eigen::Vector3d composed = (a * b).act(x);
    CHECK((direct - composed).norm() < 1e-12);
    const Pose ainv = a.inverse();
    CHECK(((a * ainv).p).norm() < 1e-12);
    CHECK((a * ainv).r.angle() < 1e-12);
    CHECK((ainv.act(a.act(x)) - x).norm() < 1e-12);
  }
}

TEST_CASE("pose_distance value and symmetry") {
  const WeightMatrix W(Eigen::Vector3d(10.0, 10.0, 10.0),
                       Eigen::Vector3d(0.01, 0.01, 0.0));
  Pose a(Eigen::Vector3d(0.01, 0.0, 0.0), RotVec::Zero());
  Pose b = Pose::Identity();
  const PoseDistance pd = pose_distance(a, b, W);
  // 0.5 * 10 * 0.01^2
  CHECK(pd.d == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(pd.error.translation().x() == doctest::Approx(0.01));

  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const Pose x = testing::random_pose(rng);
    const Pose y = testing::random_pose(rng);
    const WeightMatrix Wr(Eigen::Vector3d(3.0, 2.0, 1.0),
                          Eigen::Vector3d(0.5, 0.4, 0.3));
    const double dxy = pose_distance(x, y, Wr).d;
    const double dyx = pose_distance(y, x, Wr).d;
    CHECK(dxy == doctest::Approx(dyx).epsilon(1e-10));
    CHECK(pose_distance(x, x, Wr).d == doctest::Approx(0.0));
  }
}

TEST_CASE("pose_distance is invariant to rotation-vector wrap") {
  const WeightMatrix W(Eigen::Vector3d(1.0, 1.0, 1.0),
                       Eigen::Vector3d(1.0, 1.0, 1.0));
  const RotVec r(2.0, 1.0, -0.5);
  const Pose a(Eigen::Vector3d(0.1, 0.2, 0.3), r);
  const Pose b(a.p, RotVec((1.0 - 2.0 * 3.14159265358979323846 / r.angle()) *
                           r.v));
  std::mt19937_64 rng(43);
  const Pose target = testing::random_pose(rng);
  CHECK(pose_distance(a, target, W).d ==
        doctest::Approx(pose_distance(b, target, W).d).epsilon(1e-9));
}

TEST_CASE("pose_distance_grad matches finite differences") {
  std::mt19937_64 rng(47);
  const WeightMatrix W(Eigen::Vector3d(10.0, 10.0, 10.0),
                       Eigen::Vector3d(0.01, 0.01, 0.0));
  for (int i = 0; i < 200; ++i) {
    const Pose target = testing::random_pose(rng, 0.3, 2.0);
    const Pose at = testing::random_pose(rng, 0.3, 2.0);
    Eigen::VectorXd x(6);
    x << at.p, at.r.v;
    const auto unpack = [](const Eigen::VectorXd& v) {
      return Pose(v.head<3>(), RotVec(v.tail<3>()));
    };
    const auto f = [&](const Eigen::VectorXd& v) {
      return pose_distance(unpack(v), target, W).d;
    };
    const Eigen::Matrix<double, 6, Eigen::Dynamic> J_x =
        pose_coordinate_jacobian(at.r);
    const Eigen::RowVectorXd analytic =
        pose_distance_grad(at, target, W, J_x);
    const Eigen::RowVectorXd numeric = testing::fd_gradient(f, x, 1e-7);
    CHECK(testing::gradient_rel_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("pose_coordinate_jacobian blocks") {
  const RotVec r(0.4, -0.2, 0.9);
  const Matrix6d J = pose_coordinate_jacobian(r);
  CHECK(mat_err(J.topLeftCorner<3, 3>(), Eigen::Matrix3d::Identity()) == 0.0);
  CHECK(mat_err(J.bottomRightCorner<3, 3>(), left_jacobian(r)) == 0.0);
  CHECK(J.topRightCorner<3, 3>().cwiseAbs().maxCoeff() == 0.0);
}
