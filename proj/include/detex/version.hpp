#pragma once

#define DETEX_VERSION "0.1.0"
