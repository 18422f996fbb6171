#pragma once

#include <array>
#include <cstdint>

namespace ebm {

/// D3Q19 velocity set. Ordering is fixed: rest first, then the six axis
/// directions, then the twelve edge diagonals, with opposite directions
/// adjacent (inv(i) = i +/- 1 for i > 0). Output files and tests rely on
/// this ordering being stable.
namespace stencil {

inline constexpr int Q = 19;

inline constexpr std::array<std::array<int, 3>, Q> E = {{
    {0, 0, 0},                                            // 0: rest
    {1, 0, 0},  {-1, 0, 0},                               // 1,2: +x,-x
    {0, 1, 0},  {0, -1, 0},                               // 3,4: +y,-y
    {0, 0, 1},  {0, 0, -1},                               // 5,6: +z,-z
    {1, 1, 0},  {-1, -1, 0}, {1, -1, 0}, {-1, 1, 0},      // 7..10: xy
    {1, 0, 1},  {-1, 0, -1}, {1, 0, -1}, {-1, 0, 1},      // 11..14: xz
    {0, 1, 1},  {0, -1, -1}, {0, 1, -1}, {0, -1, 1},      // 15..18: yz
}};

// Weights as exact rationals over 36: rest 12/36, axis 2/36, diagonal 1/36.
inline constexpr std::array<int, Q> W_NUM = {12, 2, 2, 2, 2, 2, 2,
                                             1,  1, 1, 1, 1, 1,
                                             1,  1, 1, 1, 1, 1};
inline constexpr int W_DEN = 36;

inline constexpr std::array<double, Q> W = {
    1.0 / 3.0,
    1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0, 1.0 / 18.0,
    1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0,
    1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};

constexpr int inv(int i) { return i == 0 ? 0 : (i % 2 == 1 ? i + 1 : i - 1); }

inline constexpr std::array<int, Q> INV = {0, 2,  1,  4,  3,  6,  5,
                                           8, 7,  10, 9,  12, 11, 14,
                                           13, 16, 15, 18, 17};

/// Lattice speed of sound squared, lattice units.
inline constexpr double CS2 = 1.0 / 3.0;
inline constexpr double INV_CS2 = 3.0;
inline constexpr double INV_CS4 = 9.0;

}  // namespace stencil
}  // namespace ebm
