#pragma once

// Every numerical tolerance used by the library lives here so that a slack
// can be audited (and tightened) in one place.  Checks of the form
// lhs <= rhs are accepted when lhs <= rhs + slack * max(1, |rhs|) unless a
// comment says otherwise.

namespace qnlab::tol {

// dense linear algebra
inline constexpr double kSymmetryRel = 1e-12;        // ||A - A^T|| vs ||A||
inline constexpr double kPositiveDefiniteRel = 1e-12; // eigenvalues vs lambda_max
inline constexpr double kDiagonalFastPathRel = 1e-12; // dense vs diagonal agreement

// optimizer updates
inline constexpr double kCurvatureRel = 1e-14;       // s.y vs ||s|| ||y||
inline constexpr double kDegenerateDenomRel = 1e-14; // y.Hy vs ||y||^2 ||H||_F
inline constexpr double kStopStep = 1e-14;           // ||s|| vs 1 + ||x||

// inequality checks; slacks are relative to the comparison scale
inline constexpr double kProjectionGapSlack = 1e-10;
inline constexpr double kNormProductSlack = 1e-10;
inline constexpr double kBanachSlack = 1e-10;
inline constexpr double kSecantFrameSlack = 1e-10;
inline constexpr double kLinearizationSlack = 1e-12;  // absolute, see check site
inline constexpr double kPotentialAuditSlack = 1e-9;
inline constexpr double kConditionSlack = 1e-12;
inline constexpr double kMonitorSlack = 1e-10;
inline constexpr double kEnvelopeSlack = 1e-12;      // strict envelope comparisons

// monitor gating: conclusion checks are suspended once the weighted distance
// ratio ||r_k|| / ||r_0|| falls below this floor
inline constexpr double kRatioFloor = 1e-13;

}  // namespace qnlab::tol
