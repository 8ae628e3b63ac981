#pragma once

#include <stdexcept>
#include <string>

namespace pluripot {

// Usage-class errors map to CLI exit code 2, numerical ones to 3.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what, bool numerical)
        : std::runtime_error(what), kind_(std::move(kind)), numerical_(numerical) {}

    const std::string& kind() const noexcept { return kind_; }
    bool numerical() const noexcept { return numerical_; }

private:
    std::string kind_;
    bool numerical_;
};

#define PLURIPOT_ERROR(Name, tag, numeric)                                   \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(tag, what, numeric) {} \
    };

PLURIPOT_ERROR(SizeError, "size", false)
PLURIPOT_ERROR(DomainError, "domain", false)
PLURIPOT_ERROR(FlatMeshError, "flat-mesh", false)
PLURIPOT_ERROR(UndersamplingError, "undersampling", false)
PLURIPOT_ERROR(GridConfigError, "grid-config", false)
PLURIPOT_ERROR(NoReferenceError, "no-reference", false)
PLURIPOT_ERROR(FeasibilityError, "feasibility", false)
PLURIPOT_ERROR(NonUnisolventError, "non-unisolvent", true)
PLURIPOT_ERROR(DegenerateWeightError, "degenerate-weight", true)
PLURIPOT_ERROR(IllConditionedError, "ill-conditioned", true)
PLURIPOT_ERROR(NoAccelerantError, "no-accelerant", true)

#undef PLURIPOT_ERROR

}  // namespace pluripot
