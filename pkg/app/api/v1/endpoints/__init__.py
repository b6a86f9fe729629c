# API endpoints



















