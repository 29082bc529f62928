#include "axs/skeleton.hpp"

namespace axs {

const std::array<std::size_t, kFaceLandmarks> kFaceSubset = {
    // jaw line
    127, 234, 132, 58, 172, 150, 176, 148, 152, 377, 400, 379, 397, 288, 361, 454, 356,
    // brows
    70, 63, 105, 66, 107, 336, 296, 334, 293, 300,
    // nose bridge and nostrils
    168, 197, 5, 4, 75, 97, 2, 326, 305,
    // eyes
    33, 160, 158, 133, 153, 144, 362, 385, 387, 263, 373, 380,
    // outer then inner lips
    61, 39, 37, 0, 267, 269, 291, 405, 314, 17, 84, 181, 78, 82, 13, 312, 308, 317, 14, 87};

}  // namespace axs
