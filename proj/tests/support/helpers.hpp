#pragma once

#include <random>
#include <string>
#include <vector>

#include "coop/environment.hpp"
#include "coop/log.hpp"
#include "coop/matrix.hpp"
#include "oracles.hpp"

namespace testing_support {

inline coop::Matrix to_matrix(const oracle::Dense& d) { return coop::Matrix::from_rows(d); }

inline oracle::Dense to_dense(const coop::Matrix& m) { return m.to_rows(); }

inline coop::MetzlerMatrix random_metzler(std::mt19937_64& rng, std::size_t d,
                                          double max_entry = 5.0) {
  return coop::MetzlerMatrix(to_matrix(oracle::random_metzler(rng, d, max_entry)));
}

// Random periodic Fourier system whose A(s) stays Metzler: off-diagonal
// harmonic amplitudes are bounded by a quarter of the A0 entry they perturb,
// for each of the K harmonics of both cos and sin, so the worst case keeps
// half of A0's off-diagonal mass.
inline coop::FourierMatrixMap random_fourier_map(std::mt19937_64& rng, std::size_t d,
                                                 std::size_t harmonics, std::size_t coords = 1,
                                                 double max_entry = 5.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  coop::FourierMatrixMap map;
  map.constant = to_matrix(oracle::random_metzler(rng, d, max_entry));
  const double share = 0.5 / static_cast<double>(2 * harmonics * coords);
  for (std::size_t c = 0; c < coords; ++c) {
    coop::FourierHarmonics h;
    for (std::size_t k = 0; k < harmonics; ++k) {
      coop::Matrix cm(d, d), sm(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double bound = i == j ? 1.0 : share * map.constant(i, j);
          cm(i, j) = u(rng) * bound;
          sm(i, j) = u(rng) * bound;
        }
      h.cos_terms.push_back(cm);
      h.sin_terms.push_back(sm);
    }
    map.coordinates.push_back(std::move(h));
  }
  return map;
}

inline coop::EnvironmentSpec destabilization_pair(double timescale = 1.0) {
  return coop::EnvironmentSpec::markov_switch(
      coop::Matrix{{0, 1}, {1, 0}},
      {coop::MetzlerMatrix{{-1, 0}, {10, -1}}, coop::MetzlerMatrix{{-1, 10}, {0, -1}}}, 0,
      timescale);
}

// Collects warnings instead of printing them while alive.
class CaptureWarnings {
 public:
  CaptureWarnings() : previous_(coop::set_warning_handler(&record)) { messages().clear(); }
  ~CaptureWarnings() { coop::set_warning_handler(previous_); }
  static std::vector<std::string>& messages() {
    static std::vector<std::string> m;
    return m;
  }

 private:
  static void record(std::string_view msg) { messages().emplace_back(msg); }
  coop::WarningHandler previous_;
};

}  // namespace testing_support
