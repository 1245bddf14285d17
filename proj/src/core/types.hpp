#pragma once

#include <vector>

namespace hdmann {

// Square grayscale image, row-major, values in [0, 1].
struct Image {
  int size = 0;
  std::vector<double> px;

  double at(int y, int x) const { return px[static_cast<size_t>(y * size + x)]; }
  double& at(int y, int x) { return px[static_cast<size_t>(y * size + x)]; }
  static Image zeros(int size) {
    return Image{size, std::vector<double>(static_cast<size_t>(size) * size, 0.0)};
  }
};

// An m-way n-shot problem instance: m*n support samples with relative labels
// 0..m-1, plus a batch of b query samples drawn from the same classes.
struct Episode {
  int ways = 0;
  int shots = 0;
  std::vector<Image> support_images;
  std::vector<int> support_labels;  // relative, class-major
  std::vector<Image> query_images;
  std::vector<int> query_labels;    // ground truth, relative
};

}  // namespace hdmann
