#include "bregmin/types.hpp"

namespace bregmin {

std::string_view to_string(RegKind kind) {
  switch (kind) {
    case RegKind::None: return "none";
    case RegKind::L1: return "l1";
    case RegKind::SquaredL2: return "l2";
  }
  return "none";
}

RegKind reg_kind_from_string(std::string_view name) {
  if (name == "none") return RegKind::None;
  if (name == "l1") return RegKind::L1;
  if (name == "l2") return RegKind::SquaredL2;
  throw std::invalid_argument("unknown regularizer '" + std::string(name) +
                              "' (expected none, l1 or l2)");
}

double Regularizer::value(const Vec& x) const {
  switch (kind) {
    case RegKind::None: return 0.0;
    case RegKind::L1: return lambda * x.lpNorm<1>();
    case RegKind::SquaredL2: return 0.5 * lambda * x.squaredNorm();
  }
  return 0.0;
}

}  // namespace bregmin
