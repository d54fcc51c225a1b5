#pragma once

#include "diffu/common/types.hpp"

namespace diffu::toy {

/// Interleaved (sin, cos) pairs of v at dim/2 geometric frequencies
/// w_j = 10^(-4 j / (dim/2 - 1)), i.e. wavelengths from 2*pi up to 2*pi*10^4.
/// `out` must hold dim values.
void sinusoidal_embed(double v, int dim, double* out);
Vector sinusoidal_embed(double v, int dim);

/// Derivative of the embedding with respect to v.
void sinusoidal_embed_derivative(double v, int dim, double* out);

/// The dim/2 frequencies, highest first.
const Vector& embedding_frequencies(int dim);

}  // namespace diffu::toy
