#pragma once

#include <stdexcept>
#include <string>

namespace gpiso {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GPISO_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  };

GPISO_DEFINE_ERROR(CompositeModulus)
GPISO_DEFINE_ERROR(ShapeMismatch)
GPISO_DEFINE_ERROR(CapExceeded)
GPISO_DEFINE_ERROR(NotNormal)
GPISO_DEFINE_ERROR(NotElementaryAbelian)
GPISO_DEFINE_ERROR(NonUnitriangular)
GPISO_DEFINE_ERROR(NotNilpotent)
GPISO_DEFINE_ERROR(NotAlternating)
GPISO_DEFINE_ERROR(MixedPrimes)
GPISO_DEFINE_ERROR(TrivialLayer)
GPISO_DEFINE_ERROR(NotBetweenLayers)
GPISO_DEFINE_ERROR(BlockMismatch)
GPISO_DEFINE_ERROR(InputError)
// a layer bracket that depends on coset representatives
GPISO_DEFINE_ERROR(NotWellDefined)

#undef GPISO_DEFINE_ERROR

}  // namespace gpiso
