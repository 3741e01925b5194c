#pragma once

#define MMES_VERSION_MAJOR 0
#define MMES_VERSION_MINOR 1
#define MMES_VERSION_PATCH 0
#define MMES_VERSION_STRING "0.1.0"
