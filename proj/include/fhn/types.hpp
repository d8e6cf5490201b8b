#pragma once

#include <Eigen/Core>

namespace fhn {

template <typename T>
using ArrayXX = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using ArrayX = Eigen::Array<T, Eigen::Dynamic, 1>;

using ArrayXXd = ArrayXX<double>;
using ArrayXd = ArrayX<double>;

using Index = Eigen::Index;

}  // namespace fhn
