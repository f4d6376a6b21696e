#include "ffid/measurement_log.hpp"

#include <cmath>
#include <sstream>

namespace ffid {

const char* to_string(InputConvention c) { return c == InputConvention::zoh ? "zoh" : "instantaneous"; }

InputConvention input_convention_from_string(const std::string& s) {
  if (s == "zoh") return InputConvention::zoh;
  if (s == "instantaneous") return InputConvention::instantaneous;
  throw Error(ErrorKind::invalid_log, "unknown input convention '" + s + "'");
}

int LogMetadata::samples_per_period() const {
  const double n = period * sample_rate;
  const double r = std::round(n);
  if (!(n > 0.0) || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream os;
    os << "period × sample rate must be an integer, got " << n;
    throw Error(ErrorKind::invalid_log, os.str());
  }
  return static_cast<int>(r);
}

void MeasurementLog::validate() const {
  const auto rows = static_cast<Eigen::Index>(t.size());
  if (pose.rows() != rows || pose.cols() != 6 || u.rows() != rows || u.cols() != 6 ||
      static_cast<Eigen::Index>(saturated.size()) != rows) {
    throw Error(ErrorKind::invalid_log, "log columns have inconsistent lengths");
  }
  if (meta.cycles < 1) throw Error(ErrorKind::invalid_log, "log must cover at least one cycle");
  const long expected = static_cast<long>(meta.cycles) * meta.samples_per_period();
  if (rows != expected) {
    std::ostringstream os;
    os << "log has " << rows << " rows, expected " << expected << " (" << meta.cycles << " cycles of "
       << meta.samples_per_period() << " samples)";
    throw Error(ErrorKind::invalid_log, os.str());
  }
  if (!pose.allFinite() || !u.allFinite()) throw Error(ErrorKind::invalid_log, "log contains non-finite values");
}

}  // namespace ffid
