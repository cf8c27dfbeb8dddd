#include "logbal/estimate.hpp"

#include <array>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

constexpr std::array<const char*, 6> kChannels{"theta", "alpha", "beta", "dtheta", "dalpha", "dbeta"};

}  // namespace

void SensorModel::validate() const {
  if (!(std_com >= 0.0 && std_com_rate >= 0.0 && std_angle >= 0.0 && std_rate >= 0.0)) {
    throw InvalidArgument("sensor noise stds must be >= 0");
  }
  if (dropped_channel && (*dropped_channel < 0 || *dropped_channel > 5)) {
    throw InvalidArgument("dropped_channel must be in 0..5");
  }
}

double SensorModel::channel_std(int i) const { return i < 3 ? std_angle : std_rate; }

const char* channel_name(int i) { return kChannels.at(static_cast<std::size_t>(i)); }

int channel_index(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kChannels[static_cast<std::size_t>(i)]) return i;
  }
  throw InvalidArgument("unknown channel '" + name + "'");
}

Measurement sense(const SensorModel& model, const State& truth, double com_x, double com_rate,
                  Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Measurement m;
  m.com_x = com_x + model.std_com * unit(rng);
  m.com_rate = com_rate + model.std_com_rate * unit(rng);
  const Vector6 x = truth.to_vector();
  const int n = model.dropped_channel ? 5 : 6;
  m.z.resize(n);
  int k = 0;
  for (int i = 0; i < 6; ++i) {
    const double noisy = x[i] + model.channel_std(i) * unit(rng);
    if (model.dropped_channel && *model.dropped_channel == i) continue;
    m.z[k++] = noisy;
  }
  return m;
}

Eigen::MatrixXd measurement_matrix(const SensorModel& model) {
  const int n = model.dropped_channel ? 5 : 6;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, 6);
  int k = 0;
  for (int i = 0; i < 6; ++i) {
    if (model.dropped_channel && *model.dropped_channel == i) continue;
    H(k++, i) = 1.0;
  }
  return H;
}

void discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt, Eigen::MatrixXd& Ad,
                Eigen::MatrixXd& Bd) {
  const auto n = A.rows();
  const auto m = B.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A * dt;
  aug.topRightCorner(n, m) = B * dt;
  const Eigen::MatrixXd e = aug.exp();
  Ad = e.topLeftCorner(n, n);
  Bd = e.topRightCorner(n, m);
}

KalmanModel make_kalman_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt,
                              const SensorModel& sensor, double process_noise,
                              double process_noise_rate, const Eigen::MatrixXd& com_rows) {
  sensor.validate();
  if (!(dt > 0.0) || !(process_noise >= 0.0) || !(process_noise_rate >= 0.0)) {
    throw InvalidArgument("bad Kalman settings");
  }
  KalmanModel m;
  discretize(A, B, dt, m.Ad, m.Bd);
  m.H = measurement_matrix(sensor);
  Eigen::VectorXd var(6);
  for (int i = 0; i < 6; ++i) var[i] = std::pow(sensor.channel_std(i), 2);
  m.R = m.H * var.asDiagonal() * m.H.transpose();
  if (com_rows.size() != 0) {
    if (com_rows.rows() != 2 || com_rows.cols() != A.rows()) {
      throw InvalidArgument("COM output rows must be 2 x n");
    }
    const auto k = m.H.rows();
    m.H.conservativeResize(k + 2, Eigen::NoChange);
    m.H.bottomRows(2) = com_rows;
    m.R.conservativeResizeLike(Eigen::MatrixXd::Zero(k + 2, k + 2));
    m.R(k, k) = sensor.std_com * sensor.std_com;
    m.R(k + 1, k + 1) = sensor.std_com_rate * sensor.std_com_rate;
  }
  // Angles follow from the rates exactly; the model error sits in the
  // accelerations.
  const auto half = A.rows() / 2;
  m.Q = Eigen::MatrixXd::Zero(A.rows(), A.rows());
  m.Q.diagonal().head(half).setConstant(process_noise);
  m.Q.diagonal().tail(A.rows() - half).setConstant(process_noise_rate);
  return m;
}

KalmanState kalman_step(const KalmanModel& m, const KalmanState& ks, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& z) {
  const Eigen::VectorXd x_pred = m.Ad * ks.x_hat + m.Bd * u;
  const Eigen::MatrixXd P_pred = m.Ad * ks.P * m.Ad.transpose() + m.Q;
  if (P_pred.isZero(0.0)) {
    // Perfect prior knowledge: the gain P H' S^-1 vanishes in the limit.
    return {x_pred, P_pred};
  }
  const Eigen::MatrixXd S = m.H * P_pred * m.H.transpose() + m.R;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const double scale = std::max(S.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
    throw SingularInnovation("kalman_step: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = ldlt.solve(m.H * P_pred).transpose();
  KalmanState out;
  out.x_hat = x_pred + gain * (z - m.H * x_pred);
  const auto n = P_pred.rows();
  const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(n, n) - gain * m.H;
  // Joseph form keeps P symmetric positive semidefinite.
  out.P = IKH * P_pred * IKH.transpose() + gain * m.R * gain.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

}  // namespace logbal
