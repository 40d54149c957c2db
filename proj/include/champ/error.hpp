#pragma once

#include <stdexcept>
#include <string>

namespace champ {

enum class errc {
    non_finite,
    singular_input,
    branch_cut,
    boundary_degeneracy,
    norm_violation,
    domain_violation,
    cone_point,
    quadrature_not_converged,
    support_overflow,
    budget_exceeded,
    eigenvalue_pair_invalid,
    degenerate_fit,
    config_invalid,
    io_failure,
};

inline const char* errc_name(errc e)
{
    switch (e) {
    case errc::non_finite: return "NonFinite";
    case errc::singular_input: return "SingularInput";
    case errc::branch_cut: return "BranchCut";
    case errc::boundary_degeneracy: return "BoundaryDegeneracy";
    case errc::norm_violation: return "NormViolation";
    case errc::domain_violation: return "DomainViolation";
    case errc::cone_point: return "ConePoint";
    case errc::quadrature_not_converged: return "QuadratureNotConverged";
    case errc::support_overflow: return "SupportOverflow";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::eigenvalue_pair_invalid: return "EigenvaluePairInvalid";
    case errc::degenerate_fit: return "DegenerateFit";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::io_failure: return "IoFailure";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace champ
