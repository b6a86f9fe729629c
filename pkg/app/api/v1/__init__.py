# API version 1



















