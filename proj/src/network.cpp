#include "ccwnet/network.hpp"

namespace ccwnet {

template class BasicNetwork<double>;
template class Backprop<double>;

}  // namespace ccwnet
