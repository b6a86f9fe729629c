# Core utilities and configuration


