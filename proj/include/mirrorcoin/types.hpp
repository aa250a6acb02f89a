#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mirrorcoin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// N x d particle cloud, one particle per row.
using Cloud = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecRef = Eigen::Ref<const Vec>;

// Boundary floor shared by the interior test and the projection step.
inline constexpr double kInteriorFloor = 1e-12;

class DomainViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateCloud : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

struct ConfigViolation {
  std::string key;
  std::string reason;
};

// Carries every violation found, not only the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> violations);
  ConfigError(std::string key, std::string reason);
  const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

}  // namespace mirrorcoin
