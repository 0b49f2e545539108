#include "calib/features/detections_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace calib {

void WriteDetectionsCsv(const DetectionSet& detections,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "image,i,j,x,y\n";
  char buffer[128];
  for (const auto& [image_id, list] : detections) {
    for (const FeatureDetection& d : list) {
      std::snprintf(buffer, sizeof(buffer), "%s,%d,%d,%.17g,%.17g\n",
                    image_id.c_str(), d.i, d.j, d.position.x(),
                    d.position.y());
      out << buffer;
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

DetectionSet ReadDetectionsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  DetectionSet result;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("image,", 0) == 0) continue;  // header
    }
    std::istringstream ss(line);
    std::string image_id, field;
    if (!std::getline(ss, image_id, ',')) continue;
    FeatureDetection d;
    d.validated = true;
    try {
      if (!std::getline(ss, field, ',')) continue;
      d.i = std::stoi(field);
      if (!std::getline(ss, field, ',')) continue;
      d.j = std::stoi(field);
      if (!std::getline(ss, field, ',')) continue;
      d.position.x() = std::stod(field);
      if (!std::getline(ss, field, ',')) continue;
      d.position.y() = std::stod(field);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": malformed detections row: " + line);
    }
    result[image_id].push_back(d);
  }
  return result;
}

}  // namespace calib
