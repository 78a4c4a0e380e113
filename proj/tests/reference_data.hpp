#pragma once

// Published per-scene measurements used as regression targets.

#include <array>

namespace refdata {

/// Bounding-box inputs and the resulting potential volume for one scene.
struct PotentialRow {
    int id;
    double ppu_cm;  ///< centimeters per pixel
    int f_w, f_l;   ///< pixels
    double f_h_cm;
    double volume_cm3;
};

inline constexpr std::array<PotentialRow, 3> kPotentialRows{{
    {1, 0.01786, 238, 257, 2.353, 45.91},
    {2, 0.02347, 363, 419, 2.353, 197.07},
    {5, 0.02202, 530, 581, 2.53, 377.66},
}};

/// (ground truth, predicted) volumes in cm^3 for the 18 evaluated scenes.
struct VolumePair {
    int id;
    double predicted;
    double ground_truth;
};

inline constexpr std::array<VolumePair, 18> kVolumePairs{{
    {1, 40.06, 38.53},    {2, 216.9, 280.36},   {3, 278.86, 249.67},  {4, 279.02, 295.13},
    {5, 395.76, 392.58},  {6, 205.17, 218.44},  {7, 372.93, 368.77},  {8, 186.62, 173.13},
    {9, 224.08, 232.74},  {10, 153.76, 163.09}, {11, 80.4, 85.18},    {13, 363.99, 308.28},
    {14, 535.44, 589.83}, {16, 163.13, 262.15}, {17, 224.08, 181.36}, {18, 25.4, 20.58},
    {19, 110.05, 108.35}, {20, 130.96, 119.83},
}};

inline constexpr double kPublishedMape = 10.973;

} // namespace refdata
