EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_DIAGNOSTIC_FAILURE = 2
