#pragma once

// Confusion matrix by counting every (truth, prediction) cell separately.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

inline std::vector<std::vector<std::uint64_t>> confusion(const std::vector<int>& pred,
                                                         const std::vector<int>& truth,
                                                         std::size_t classes) {
  std::vector<std::vector<std::uint64_t>> out(classes, std::vector<std::uint64_t>(classes, 0));
  for (std::size_t i = 0; i < classes; ++i)
    for (std::size_t j = 0; j < classes; ++j)
      for (std::size_t s = 0; s < pred.size(); ++s)
        if (truth[s] == static_cast<int>(i) && pred[s] == static_cast<int>(j)) ++out[i][j];
  return out;
}

}  // namespace oracle
