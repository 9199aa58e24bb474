#pragma once

#include <stdexcept>
#include <string>

namespace msle {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sde_engine
struct GapCollapse : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };

// conformal
struct InsideHull : Error { using Error::Error; };
struct AtFoot : Error { using Error::Error; };
struct WalkerLeak : Error { using Error::Error; };
struct MalformedInput : Error { using Error::Error; };

// loewner
struct ReverseBlowup : Error { using Error::Error; };

// reparam
struct CurveExhausted : Error { using Error::Error; };
struct DerivativeBlowup : Error { using Error::Error; };

// gff
struct MeshTooLarge : Error { using Error::Error; };
struct OnBoundary : Error { using Error::Error; };

// diagnostics
struct ResolutionTooCoarse : Error { using Error::Error; };

// cli_io
struct ConfigInvalid : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

} // namespace msle
