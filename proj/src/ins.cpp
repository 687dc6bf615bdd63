#include "gradesim/ins.hpp"

namespace gradesim {

ErrorState::Vector ErrorState::stacked() const {
  Vector x;
  x << dp, dpsi, dv, db_c, dd_c;
  return x;
}

ErrorState ErrorState::from_stacked(const Vector& x) {
  ErrorState e;
  e.dp = x.segment<3>(0);
  e.dpsi = x.segment<3>(3);
  e.dv = x.segment<3>(6);
  e.db_c = x.segment<3>(9);
  e.dd_c = x.segment<3>(12);
  return e;
}

StrapdownState ins_init(const Pose& ic_pose, const Vec3& ic_v, double t0) {
  StrapdownState s;
  s.d_nb = e2d(ic_pose.att);
  s.v = ic_v;
  s.p = ic_pose.p;
  s.t = t0;
  return s;
}

StrapdownState strapdown_step(const StrapdownState& s, const ImuIncrements& inc, double g) {
  StrapdownState n = s;
  const Vec3 q_t = inc.q_t - s.d_hat * inc.dt;
  const Vec3 q_v = inc.q_v - s.b_hat * inc.dt;

  n.d_nb = e2d(q_t) * s.d_nb;
  n.steps = s.steps + 1;
  if (n.steps % kReorthonormalizeEvery == 0) n.d_nb = n.d_nb.reorthonormalized();

  n.v = s.v + n.d_nb.transpose() * q_v + Vec3(0.0, 0.0, g * inc.dt);
  n.p = s.p + n.v * inc.dt;
  n.t = s.t + inc.dt;
  return n;
}

StrapdownState apply_correction(const StrapdownState& s, const ErrorState& dx) {
  StrapdownState n = s;
  n.p = s.p - dx.dp;
  n.v = s.v - dx.dv;
  if (!dx.dpsi.isZero(0)) n.d_nb = (s.d_nb * e2d(dx.dpsi)).reorthonormalized();
  n.b_hat = s.b_hat + dx.db_c;
  n.d_hat = s.d_hat + dx.dd_c;
  return n;
}

}  // namespace gradesim
