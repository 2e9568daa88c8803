// errors.hpp: exception types raised by the cpmasa library

#pragma once

#include <stdexcept>
#include <string>

namespace cpmasa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { public: using Error::Error; };
class NotSelfAdjoint : public Error { public: using Error::Error; };
class NumericalFailure : public Error { public: using Error::Error; };
class NotUnital : public Error { public: using Error::Error; };
class NotMinimal : public Error { public: using Error::Error; };
class NotInvariant : public Error { public: using Error::Error; };
class DegenerateSpectrum : public Error { public: using Error::Error; };
class PreconditionFailed : public Error { public: using Error::Error; };
class PatternExplosion : public Error { public: using Error::Error; };
class HypothesisFailed : public Error { public: using Error::Error; };
class ToleranceInvalid : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };

}  // namespace cpmasa
