# API routes



















