#include "cpmfit/app/app.hpp"

int main(int argc, char** argv) { return cpmfit::app::run(argc, argv); }
