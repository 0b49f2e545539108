#pragma once

#include <map>
#include <string>
#include <vector>

#include "calib/features/detector.h"

namespace calib {

// Detections file: CSV with columns image,i,j,x,y. One file holds the
// detections of a whole dataset keyed by image id. This is also the import
// path for externally produced detections on real images.
using DetectionSet = std::map<std::string, std::vector<FeatureDetection>>;

void WriteDetectionsCsv(const DetectionSet& detections,
                        const std::string& path);
DetectionSet ReadDetectionsCsv(const std::string& path);

}  // namespace calib
