#include "odebf/errors.hpp"

#include <sstream>

namespace odebf {

namespace {

std::string describe_non_finite(double t, const std::vector<double>& theta, std::size_t step) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite state at step " << step << ", t = " << t << ", theta = (";
  for (std::size_t i = 0; i < theta.size(); ++i) {
    os << (i ? ", " : "") << theta[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

NonFiniteState::NonFiniteState(double t, std::vector<double> theta, std::size_t step)
    : Error(describe_non_finite(t, theta, step)), t_(t), theta_(std::move(theta)), step_(step) {}

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace odebf
