#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "logbal/model.hpp"

namespace logbal {

/// Channel indices follow State: theta, alpha, beta, dtheta, dalpha, dbeta.
struct SensorModel {
  double std_com = 0.01;
  double std_com_rate = 0.005;
  double std_angle = 0.01;
  double std_rate = 0.005;
  std::optional<int> dropped_channel;
  std::uint64_t seed = 0;

  static SensorModel noiseless() { return {0.0, 0.0, 0.0, 0.0, std::nullopt, 0}; }
  void validate() const;
  /// Measurement noise std of state channel i.
  double channel_std(int i) const;
};

const char* channel_name(int i);
/// Accepts theta|alpha|beta|dtheta|dalpha|dbeta; throws InvalidArgument otherwise.
int channel_index(const std::string& name);

struct Measurement {
  /// The six angular channels minus the dropped one.
  Eigen::VectorXd z;
  double com_x = 0.0;
  double com_rate = 0.0;
};

using Rng = std::mt19937_64;

/// Draws all eight noise samples in a fixed order (COM, COM rate, then the
/// six state channels) even when a channel is dropped.
Measurement sense(const SensorModel& model, const State& truth, double com_x, double com_rate,
                  Rng& rng);

/// Rows of the identity selecting the measured channels.
Eigen::MatrixXd measurement_matrix(const SensorModel& model);

struct KalmanModel {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;  ///< measurement noise covariance
  Eigen::MatrixXd Q;  ///< process noise covariance
};

/// Exact zero-order-hold discretization of (A, B) at dt via the matrix
/// exponential of the augmented matrix.
void discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt, Eigen::MatrixXd& Ad,
                Eigen::MatrixXd& Bd);

/// Process noise is diagonal: `process_noise` on the angle half of the state,
/// `process_noise_rate` on the rate half. When `com_rows` (2 x n) is given,
/// the COM position and rate readings are appended to the measured angle
/// channels as extra filter outputs.
KalmanModel make_kalman_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt,
                              const SensorModel& sensor, double process_noise = 1e-6,
                              double process_noise_rate = 1e-5,
                              const Eigen::MatrixXd& com_rows = {});

struct KalmanState {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
};

/// Predict with input u over one period, then update with z. Throws
/// SingularInnovation when the innovation covariance cannot be factored.
KalmanState kalman_step(const KalmanModel& m, const KalmanState& ks, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& z);

}  // namespace logbal
