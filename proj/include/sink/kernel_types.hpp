#pragma once

#include <string_view>

namespace sink {

// Matérn smoothness. Only the half-integer orders with closed forms.
enum class Smoothness { Half, ThreeHalves, FiveHalves };

enum class Composition { TensorProduct, Isotropic };

// Throws ConfigError for anything but 0.5, 1.5 or 2.5.
Smoothness smoothness_from_value(double nu);
double smoothness_value(Smoothness nu);

Composition composition_from_name(std::string_view name);
std::string_view composition_name(Composition c);

}  // namespace sink
