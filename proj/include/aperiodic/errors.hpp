#pragma once

#include <stdexcept>
#include <string>

namespace aperiodic {

// Base of every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

#define APERIODIC_ERROR(Name) \
    class Name : public Error { \
    public: \
        using Error::Error; \
    }

APERIODIC_ERROR(MixedDiscriminant);
APERIODIC_ERROR(DivisionByZero);
APERIODIC_ERROR(NumericalFailure);
APERIODIC_ERROR(NotPrimitive);
APERIODIC_ERROR(NotPisot);
APERIODIC_ERROR(NotDiagonalizable);
APERIODIC_ERROR(CapacityExceeded);
APERIODIC_ERROR(ProjectionNotInjective);
APERIODIC_ERROR(EmptyRange);
APERIODIC_ERROR(NoSuitableSublattice);
APERIODIC_ERROR(PieceNotCovering);
APERIODIC_ERROR(NotAPartition);
APERIODIC_ERROR(NotContractive);
APERIODIC_ERROR(DegenerateFit);
APERIODIC_ERROR(UnsupportedFormat);
APERIODIC_ERROR(UnknownExample);

#undef APERIODIC_ERROR

} // namespace aperiodic
