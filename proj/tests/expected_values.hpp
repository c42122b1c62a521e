// Generated by tests/oracle/gen_expected.py — do not edit by hand.
#pragma once
#include <cstdint>

namespace ev {

inline constexpr std::uint64_t SPLITMIX_SEED42_0 = 13679457532755275413ULL;
inline constexpr std::uint64_t SPLITMIX_SEED42_1 = 2949826092126892291ULL;
inline constexpr std::uint64_t SPLITMIX_SEED42_2 = 5139283748462763858ULL;
inline constexpr std::uint64_t XOSHIRO_SEED42_0 = 1546998764402558742ULL;
inline constexpr std::uint64_t XOSHIRO_SEED42_1 = 6990951692964543102ULL;
inline constexpr std::uint64_t XOSHIRO_SEED42_2 = 12544586762248559009ULL;
inline constexpr std::uint64_t HASH64_11_22_33_44 = 1752868150762473413ULL;
inline constexpr double EPS_M10_D01_V1 = 0.4605170185988092;  // (1/10)ln10 + (1/10)ln10
inline constexpr double EPS_M1_D05_V1 = 2.0;  // both positive logs clamp to 1
inline constexpr double KL_075_025 = 0.5493061443340548;
inline constexpr double SLUD_M100_P025_M05 = 0.06589928452893169;
inline constexpr double TAIL_100_05_50 = 0.46020538130641064;  // exact rational P(Bin(100,0.5)>50)
inline constexpr double TAIL_50_025_20 = 0.006262907247611061;  // exact rational P(Bin(50,0.25)>20)
inline constexpr double TAIL_500_005_30 = 0.13085229789539043;  // exact rational P(Bin(500,0.05)>30)
inline constexpr double TAIL_10_05_4 = 0.623046875;  // exact rational P(Bin(10,0.5)>4)
inline constexpr double TAIL_200_033_80 = 0.01565191137011618;  // exact rational P(Bin(200,0.33)>80)
inline constexpr double TWOPOINT_WRONG_EXCESS = 0.25;  // mass 1/2 at x1, eta 1/4: (1/2)(3/4-1/4)
inline constexpr double POWERLAW_RHO25_CDF_03 = 0.04929503017547357;  // Simpson quadrature of the density on [0,0.3]
inline constexpr double LB_TASK_EXCESS_3FLIPS = 0.003750000000000002;
inline constexpr double LB_TARGET_EXCESS_3FLIPS = 0.037500000000000006;
inline constexpr double LB_TASK_DISAGREE_3FLIPS = 0.037500000000000006;  // marginal mass of the flipped points
inline constexpr double ASYM_TARGET_WRONG_EXCESS = 0.25;  // mass 1/2, eta 1/4 at x1
inline constexpr double ASYM_SOURCE_WRONG_EXCESS = 0.005059644256269407;  // mass 1, eta 1/2 - c2/sqrt(n_P)
inline constexpr double ASYM_MIN_RHO = 2.542249444035256;  // single wrong hypothesis: ln E_P / ln(E_D / C_rho) at C_rho = 2
inline constexpr double IMP_EPS = 0.004988912827953468;
inline constexpr double IMP_EPS0 = 0.318334351464743;
inline constexpr double IMP_RHO_P = 3.7375017686776157;
inline constexpr double IMP_TARGET_WRONG_EXCESS = 0.07958358786618576;
inline constexpr double IMP_SOURCE_WRONG_EXCESS = 0.00015590352587354598;
inline constexpr double IMP_CBETA = 2.0;
inline constexpr double IMP_PHOM_N2 = 5.086890725526245e-06;  // enumeration over the two-point product space
inline constexpr double IMP_E_NP_HOM = 0.0208359044117555;
inline constexpr double IMP_LOGLR_FIXED_Z = -0.09795151882667508;  // brute-force product over the explicit 5-vector multisample
inline constexpr long long IMP_STATS_FIXED_Z[8] = {1, 1, 3, 4, 1, 2, 1, 1};  // N+, N-, n+, n-, ntilde+, ntilde-, target+, target-
inline constexpr double BOUND_ORACLE_DEMO = 5.265757968532532;
inline constexpr double BOUND_GENERAL_POOL_DEMO = 3.5827953934588055;
inline constexpr double BOUND_QUANTILE_DEMO = 4.514039333685133;
inline constexpr int BOUND_QUANTILE_DEMO_T = 3;
inline constexpr double BOUND_POOL_B1_DEMO = 2.691284952506579;

}  // namespace ev
