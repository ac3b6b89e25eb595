#include "superburst/record.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace superburst {

void EmissionRecord::allocate(const VectorX& times, std::vector<std::string> channel_keys,
                              std::vector<std::string> directional_keys, bool with_stderr,
                              bool with_excited) {
  t = times;
  channels = std::move(channel_keys);
  directional = std::move(directional_keys);
  const Eigen::Index n = times.size();
  const auto k = static_cast<Eigen::Index>(channels.size());
  const auto kd = static_cast<Eigen::Index>(directional.size());
  rates = MatrixX::Zero(n, k);
  directional_rates = MatrixX::Zero(n, kd);
  rates_stderr = with_stderr ? MatrixX::Zero(n, k) : MatrixX();
  total_stderr = with_stderr ? VectorX::Zero(n) : VectorX();
  directional_stderr = with_stderr ? MatrixX::Zero(n, kd) : MatrixX();
  excited = with_excited ? VectorX::Zero(n) : VectorX();
}

void EmissionRecord::truncate(Eigen::Index samples) {
  if (samples >= t.size()) return;
  t.conservativeResize(samples);
  rates.conservativeResize(samples, Eigen::NoChange);
  directional_rates.conservativeResize(samples, Eigen::NoChange);
  if (rates_stderr.size()) rates_stderr.conservativeResize(samples, Eigen::NoChange);
  if (total_stderr.size()) total_stderr.conservativeResize(samples);
  if (directional_stderr.size()) directional_stderr.conservativeResize(samples, Eigen::NoChange);
  if (excited.size()) excited.conservativeResize(samples);
}

Eigen::Index EmissionRecord::channel_index(const std::string& key) const {
  for (std::size_t a = 0; a < channels.size(); ++a) {
    if (channels[a] == key) return static_cast<Eigen::Index>(a);
  }
  throw std::invalid_argument("record has no channel '" + key + "'");
}

double trapezoid(const VectorX& t, const VectorX& y) {
  if (t.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (Eigen::Index i = 1; i < t.size(); ++i) s += 0.5 * (t(i) - t(i - 1)) * (y(i) + y(i - 1));
  return s;
}

VectorX EmissionRecord::photons() const {
  VectorX out(rates.cols());
  for (Eigen::Index a = 0; a < rates.cols(); ++a) out(a) = trapezoid(t, rates.col(a));
  return out;
}

void write_record_csv(std::ostream& os, const EmissionRecord& r) {
  const bool with_stderr = r.rates_stderr.size() > 0;
  const bool with_excited = r.excited.size() > 0;
  os << "t_gamma0,R_total";
  for (const auto& k : r.channels) os << ",R_" << k;
  for (const auto& k : r.directional) os << ",R_dir_" << k;
  if (with_stderr) {
    os << ",R_total_stderr";
    for (const auto& k : r.channels) os << ",R_" << k << "_stderr";
    for (const auto& k : r.directional) os << ",R_dir_" << k << "_stderr";
  }
  if (with_excited) os << ",excited";
  os << '\n';
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < r.samples(); ++i) {
    os << r.t(i) << ',' << r.rates.row(i).sum();
    for (Eigen::Index a = 0; a < r.rates.cols(); ++a) os << ',' << r.rates(i, a);
    for (Eigen::Index a = 0; a < r.directional_rates.cols(); ++a) os << ',' << r.directional_rates(i, a);
    if (with_stderr) {
      os << ',' << r.total_stderr(i);
      for (Eigen::Index a = 0; a < r.rates_stderr.cols(); ++a) os << ',' << r.rates_stderr(i, a);
      for (Eigen::Index a = 0; a < r.directional_stderr.cols(); ++a)
        os << ',' << r.directional_stderr(i, a);
    }
    if (with_excited) os << ',' << r.excited(i);
    os << '\n';
  }
}

}  // namespace superburst
