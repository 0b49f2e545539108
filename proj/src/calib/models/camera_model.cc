#include "calib/models/camera_model.h"

namespace calib {

std::string CameraModelKindName(CameraModelKind kind) {
  switch (kind) {
    case CameraModelKind::kCentralGeneric: return "central-generic";
    case CameraModelKind::kNoncentralGeneric: return "noncentral-generic";
    case CameraModelKind::kPolynomial12: return "polynomial12";
    case CameraModelKind::kThinPrismFisheye: return "thin-prism-fisheye";
    case CameraModelKind::kCentralRadial: return "central-radial";
    case CameraModelKind::kSyntheticCentral: return "synthetic-central";
    case CameraModelKind::kSyntheticNoncentral: return "synthetic-noncentral";
  }
  return "unknown";
}

std::optional<CameraModelKind> CameraModelKindFromName(const std::string& s) {
  for (CameraModelKind kind :
       {CameraModelKind::kCentralGeneric, CameraModelKind::kNoncentralGeneric,
        CameraModelKind::kPolynomial12, CameraModelKind::kThinPrismFisheye,
        CameraModelKind::kCentralRadial, CameraModelKind::kSyntheticCentral,
        CameraModelKind::kSyntheticNoncentral}) {
    if (CameraModelKindName(kind) == s) return kind;
  }
  return std::nullopt;
}

}  // namespace calib
