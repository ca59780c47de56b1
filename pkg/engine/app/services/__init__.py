# Services





