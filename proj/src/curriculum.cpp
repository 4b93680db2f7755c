#include "acer/curriculum.hpp"

#include <cmath>
#include <stdexcept>

namespace acer {

void CurriculumConfig::validate() const {
  if (c_init <= 0.0) throw std::invalid_argument("CurriculumConfig: c_init must be > 0");
  if (update_period < 1) throw std::invalid_argument("CurriculumConfig: update_period must be >= 1");
  if (!(k1 > k2 && k2 > 0.0)) throw std::invalid_argument("CurriculumConfig: need k1 > k2 > 0");
}

namespace curriculum {

double priority(double delta, double c, double k1, double k2) {
  const double mag = std::abs(delta);
  const double p = mag <= c ? std::exp(k1 * (mag - c)) : std::exp(k2 * (c - mag));
  // exp underflows to exact 0 for |delta| ~ 1e6 at small k; floor keeps
  // the range (0,1] and both sum-tree factors finite
  return std::max(p, 1e-18);
}

CurriculumState advance_episode(CurriculumState state, const CurriculumConfig& cfg) {
  ++state.episodes_seen;
  if (state.episodes_seen % cfg.update_period == 0) {
    state.c += cfg.c_incr;
  }
  return state;
}

}  // namespace curriculum

}  // namespace acer
