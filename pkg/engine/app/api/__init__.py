# API routes





