#pragma once

#include <stdexcept>
#include <string>

namespace brakeidx {

/// Base of every numerical failure raised by the library. `name()` is the
/// stable identifier embedded in CLI reports.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

#define BRAKEIDX_DEFINE_ERROR(Type)                                                  \
    class Type : public NumericalError {                                             \
    public:                                                                          \
        explicit Type(const std::string& what) : NumericalError(#Type, what) {}      \
    }

// symplectic-core
BRAKEIDX_DEFINE_ERROR(SymplecticityLost);
BRAKEIDX_DEFINE_ERROR(PhaseJumpTooLarge);
// index-engine
BRAKEIDX_DEFINE_ERROR(IrregularCrossing);
BRAKEIDX_DEFINE_ERROR(Undersampled);
BRAKEIDX_DEFINE_ERROR(SymmetryViolated);
// asymptotic-operator
BRAKEIDX_DEFINE_ERROR(TruncationUnstable);
BRAKEIDX_DEFINE_ERROR(CrossingUnresolved);
BRAKEIDX_DEFINE_ERROR(EndpointDegenerate);
// model-operator-oracle
BRAKEIDX_DEFINE_ERROR(OmegaResonant);
BRAKEIDX_DEFINE_ERROR(BoundaryMismatch);
// moduli-dimension
BRAKEIDX_DEFINE_ERROR(DegenerateOrbit);
BRAKEIDX_DEFINE_ERROR(DegenerateIterate);
// hamiltonian-lab
BRAKEIDX_DEFINE_ERROR(EnergyDrift);
BRAKEIDX_DEFINE_ERROR(NoConvergence);
BRAKEIDX_DEFINE_ERROR(LeftEnergySurface);
BRAKEIDX_DEFINE_ERROR(RadialDegeneracy);

#undef BRAKEIDX_DEFINE_ERROR

}  // namespace brakeidx
