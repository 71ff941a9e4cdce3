#ifndef MMP_TESTS_FIXTURES_HPP
#define MMP_TESTS_FIXTURES_HPP

#include "mmp/core.hpp"

namespace mmp::fixtures {

// 5 x 6 unit-column instance where breadth-first search with L = 2, K = 3
// keeps {2},{4} then {2,1},{2,5},{4,1},{4,5} (1-based), and the eight
// third-layer children collapse to five supports: {2,5,4} is reached from
// both {2,5} and {4,5}, {1,2,4} from {2,1} and {4,1}.
// Found by a seeded search over Gaussian matrices and frozen here.
inline Matrix merge_matrix() {
  Matrix a(5, 6);
  a << -0.67605666864996783, 0.20902940397876801, 0.51662511621958684, -0.22223858049714859, 0.20451937155952465,
      -0.21734144876919018,
      -0.21176801945487442, -0.92433168405774779, -0.44009709586687557, -0.79458280762321021, 0.36107332056837699,
      0.21846148741575,
      -0.5224021402986464, 0.030126329298167713, -0.11257318253288921, -0.47246042885476713, -0.1090827781311674,
      0.53208489217847144,
      0.46171835802292716, 0.20859066929883918, -0.22898714214963481, 0.22325848947463531, -0.89896351634111449,
      -0.7123645045072371,
      0.10960770222056829, 0.23979154089277108, 0.68869819428048462, -0.2149068756743317, 0.088110315136358627,
      -0.33831901128460179;
  return a;
}

inline Vector merge_measurements() {
  Vector y(5);
  y << 1.3929092683397395, -1.4760899066132367, -1.0044699525121055, -0.57710776229969873, -1.1771334327231009;
  return y;
}

}  // namespace mmp::fixtures

#endif  // MMP_TESTS_FIXTURES_HPP
