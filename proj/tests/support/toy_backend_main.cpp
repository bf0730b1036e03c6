#include "icolor/imagination.hpp"

int main() { return icolor::run_toy_backend_stdio(); }
