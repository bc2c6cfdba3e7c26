package com.minipet.pets;

import java.util.List;

import com.minipet.owners.Owner;

public interface PetRepository {
    List<Pet> findByOwner(Owner owner);

    void save(Pet pet);
}
