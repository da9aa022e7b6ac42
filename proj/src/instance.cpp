#include "pap/instance.hpp"

#include "pap/error.hpp"

namespace pap {

void Instance::validate() const {
  if (B.rows() != A.rows() || B.cols() != A.cols() || c.size() != A.cols() || d.size() != A.cols())
    throw Error(ErrorCode::DimensionMismatch, "instance shapes are inconsistent");
  if (A.rows() == 0 || A.cols() == 0) throw Error(ErrorCode::InvalidArgument, "empty instance");
  if (!A.allFinite() || !B.allFinite() || !c.allFinite() || !d.allFinite())
    throw Error(ErrorCode::InvalidArgument, "instance has NaN/Inf entries");
  if ((A.array() < 0).any()) throw Error(ErrorCode::InvalidArgument, "A must be nonnegative");
  if ((c.array() < 0).any() || (d.array() < 0).any())
    throw Error(ErrorCode::InvalidArgument, "costs must be nonnegative");
}

}  // namespace pap
